import numpy as np

from grid.schemas import Field, Grid
from operators.schemas import FaceFluxes, HamiltonianScheme, VectorField
from scaling.schemas import PdeParams


def gradient(u: Field, grid: Grid) -> VectorField:
    """
    Node gradient of u.

    Central differences at interior nodes, second-order one-sided differences at
    boundary nodes (numpy's ``edge_order=2``). Exact for polynomials of degree <= 2.

    Args:
        u (Field): Node values.
        grid (Grid): Owning grid.

    Returns:
        VectorField: (u_x, u_y) at every node.
    """
    uy, ux = np.gradient(u.values, grid.hy, grid.hx, edge_order=2)
    return VectorField(ux=ux, uy=uy)


def face_fluxes(u: Field, grid: Grid, p: float, eta_reg: float = 0.0) -> FaceFluxes:
    """
    Face fluxes |∇u|_face^(p-2) * (normal difference) of the conservative p-Laplacian.

    The face gradient combines the normal difference across the face with the
    average of the two adjacent transverse central differences. ``eta_reg`` is
    added to |∇u|_face^2 before taking the power (0 keeps the exact operator).
    """
    U = u.values
    hx, hy = grid.hx, grid.hy
    half = 0.5 * (p - 2.0)

    # x-faces on interior rows
    uy_c = (U[2:, :] - U[:-2, :]) / (2.0 * hy)
    dxu = (U[1:-1, 1:] - U[1:-1, :-1]) / hx
    trans_y = 0.5 * (uy_c[:, 1:] + uy_c[:, :-1])
    fx = (dxu * dxu + trans_y * trans_y + eta_reg) ** half * dxu

    # y-faces on interior columns
    ux_c = (U[:, 2:] - U[:, :-2]) / (2.0 * hx)
    dyu = (U[1:, 1:-1] - U[:-1, 1:-1]) / hy
    trans_x = 0.5 * (ux_c[1:, :] + ux_c[:-1, :])
    fy = (dyu * dyu + trans_x * trans_x + eta_reg) ** half * dyu

    return FaceFluxes(fx=fx, fy=fy)


def p_laplacian(u: Field, grid: Grid, p: float, eta_reg: float = 0.0) -> Field:
    """
    Conservative flux-form discretization of Δ_p u = div(|∇u|^(p-2) ∇u).

    Defined on interior nodes; boundary nodes are set to 0. Stencils next to the
    boundary read the Dirichlet values directly, there are no ghost nodes.

    Args:
        u (Field): Node values including the Dirichlet boundary values.
        grid (Grid): Owning grid.
        p (float): Exponent, p > 2.
        eta_reg (float, optional): Face-gradient regularization. Defaults to 0.

    Returns:
        Field: Δ_p u at interior nodes, 0 on the boundary.
    """
    fluxes = face_fluxes(u, grid, p, eta_reg)
    div = (fluxes.fx[:, 1:] - fluxes.fx[:, :-1]) / grid.hx + (
        fluxes.fy[1:, :] - fluxes.fy[:-1, :]
    ) / grid.hy
    out = np.zeros(grid.shape)
    out[1:-1, 1:-1] = div
    return Field(values=out, time=u.time)


def boundary_flux(u: Field, grid: Grid, p: float, eta_reg: float = 0.0) -> float:
    """Net outward flux through the outermost faces, the telescoped sum of p_laplacian * hx * hy."""
    fluxes = face_fluxes(u, grid, p, eta_reg)
    net_x = np.sum(fluxes.fx[:, -1] - fluxes.fx[:, 0]) * grid.hy
    net_y = np.sum(fluxes.fy[-1, :] - fluxes.fy[0, :]) * grid.hx
    return float(net_x + net_y)


def _upwind_gradient_squared(U: np.ndarray, grid: Grid) -> np.ndarray:
    # Godunov selection for u_t - |∇u|^q = 0 (concave Hamiltonian), interior nodes
    back_x = (U[1:-1, 1:-1] - U[1:-1, :-2]) / grid.hx
    fwd_x = (U[1:-1, 2:] - U[1:-1, 1:-1]) / grid.hx
    back_y = (U[1:-1, 1:-1] - U[:-2, 1:-1]) / grid.hy
    fwd_y = (U[2:, 1:-1] - U[1:-1, 1:-1]) / grid.hy
    gx2 = np.maximum(np.minimum(back_x, 0.0) ** 2, np.maximum(fwd_x, 0.0) ** 2)
    gy2 = np.maximum(np.minimum(back_y, 0.0) ** 2, np.maximum(fwd_y, 0.0) ** 2)
    return gx2 + gy2


def hamiltonian(
    u: Field, grid: Grid, q: float, scheme: HamiltonianScheme = HamiltonianScheme.CENTRAL
) -> Field:
    """
    The gradient source |∇u|^q.

    Args:
        u (Field): Node values.
        grid (Grid): Owning grid.
        q (float): Exponent, q > 0.
        scheme (HamiltonianScheme, optional): ``central`` uses the gradient operator;
            ``upwind`` uses the Godunov one-sided selection at interior nodes.

    Returns:
        Field: |∇u|^q at every node (boundary nodes always from the central gradient).
    """
    g2 = gradient(u, grid).norm_squared()
    if HamiltonianScheme(scheme) is HamiltonianScheme.UPWIND:
        g2[1:-1, 1:-1] = _upwind_gradient_squared(u.values, grid)
    return Field(values=g2 ** (0.5 * q), time=u.time)


def rhs(
    u: Field,
    grid: Grid,
    params: PdeParams,
    scheme: HamiltonianScheme = HamiltonianScheme.CENTRAL,
    eta_reg: float = 0.0,
) -> Field:
    """
    Right-hand side Δ_p u + |∇u|^q at interior nodes, 0 at the held Dirichlet nodes.
    """
    out = p_laplacian(u, grid, params.p, eta_reg).values
    ham = hamiltonian(u, grid, params.q, scheme).values
    out[1:-1, 1:-1] += ham[1:-1, 1:-1]
    return Field(values=out, time=u.time)
