from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy import sparse
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import cg, spsolve

from barriers.nondegenerate import nondeg_comparison
from barriers.schemas import BarrierBundle, NondegBarrierParams, ResidualReport, SolveMethod, VSolution
from diagnostics.schemas import ClaimSection, ClaimStatus, Witness
from grid.schemas import Field, Grid
from helpers.exceptions import SolverConvergenceError
from initial_data.schemas import ConditionResult
from initial_data.service import cutoff_phi
from operators.service import gradient, hamiltonian, p_laplacian
from scaling.schemas import PdeParams

logger = logging.getLogger(__name__)

RESIDUAL_TARGET = 1e-10
MU_THRESHOLD = -1e-8


def boundary_profile(grid: Grid, rho: float) -> np.ndarray:
    """
    Dirichlet data of the elliptic problem: 1 on [-rho/2, rho/2] x {0}, 0 off (-rho, rho) x {0}.

    The bottom edge carries cutoff_phi(x / (1.5 rho)); every other boundary node is 0.
    """
    phi = np.zeros(grid.shape)
    phi[0, :] = np.where(np.abs(grid.x) < rho, cutoff_phi(grid.x / (1.5 * rho)), 0.0)
    return phi


def _anisotropic_operator(grid: Grid, p: float) -> sparse.csr_matrix:
    """-(D_xx + (p-1) D_yy) on interior nodes, row-major by y then x."""
    mx, my = grid.nx - 2, grid.ny - 2
    dxx = sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(mx, mx)) / grid.hx**2
    dyy = sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(my, my)) / grid.hy**2
    lap = sparse.kron(sparse.identity(my), dxx) + (p - 1.0) * sparse.kron(dyy, sparse.identity(mx))
    return (-lap).tocsr()


def _load_vector(boundary: np.ndarray, grid: Grid, p: float) -> np.ndarray:
    b = np.ones((grid.ny - 2, grid.nx - 2))
    b[:, 0] += boundary[1:-1, 0] / grid.hx**2
    b[:, -1] += boundary[1:-1, -1] / grid.hx**2
    b[0, :] += (p - 1.0) * boundary[0, 1:-1] / grid.hy**2
    b[-1, :] += (p - 1.0) * boundary[-1, 1:-1] / grid.hy**2
    return b.ravel()


def solve_V(
    grid: Grid,
    p: float,
    rho: float,
    method: SolveMethod = SolveMethod.CG,
    maxiter: Optional[int] = None,
    torsion_only: bool = False,
) -> VSolution:
    """
    Solve -(V_xx + (p-1) V_yy) = 1 in the rectangle with V = phi on the boundary.

    Five-point anisotropic discretization; conjugate gradients (default) or a sparse
    direct solve. The returned V is mirror-averaged, the discrete problem being symmetric.

    Args:
        grid (Grid): Grid of the rectangle.
        p (float): Anisotropy p - 1 of the y-direction.
        rho (float): Localization radius fixing the boundary profile.
        method (SolveMethod, optional): ``cg`` or ``direct``.
        maxiter (int, optional): CG iteration cap. Defaults to 10 * number of unknowns.
        torsion_only (bool, optional): Use V = 0 on the boundary (self-test mode).

    Returns:
        VSolution: V with the method, iteration count and relative residual.

    Raises:
        SolverConvergenceError: If the relative residual stays above 1e-10.
    """
    boundary = np.zeros(grid.shape) if torsion_only else boundary_profile(grid, rho)
    A = _anisotropic_operator(grid, p)
    b = _load_vector(boundary, grid, p)
    iterations = 0

    if SolveMethod(method) is SolveMethod.DIRECT:
        v = spsolve(A.tocsc(), b)
    else:
        counter = {"n": 0}

        def count(_):
            counter["n"] += 1

        maxiter = maxiter or 10 * b.size
        v, info = cg(A, b, rtol=0.1 * RESIDUAL_TARGET, maxiter=maxiter, callback=count)
        iterations = counter["n"]
        if info != 0:
            raise SolverConvergenceError(f"CG stopped after {iterations} iterations (info={info})")

    relative = float(np.linalg.norm(b - A @ v) / np.linalg.norm(b))
    if relative > RESIDUAL_TARGET:
        raise SolverConvergenceError(f"relative residual {relative:.3e} above {RESIDUAL_TARGET}")

    values = boundary.copy()
    values[1:-1, 1:-1] = v.reshape(grid.ny - 2, grid.nx - 2)
    values = 0.5 * (values + values[:, ::-1])
    logger.info(f"V solved ({SolveMethod(method).value}, {iterations} iterations, residual {relative:.2e})")
    return VSolution(
        V=Field(values=values), method=method, iterations=iterations, relative_residual=relative
    )


def torsion_series_max(terms: int = 200) -> float:
    """Center value of the unit-square torsion function from its double sine series."""
    m = np.arange(1, 2 * terms, 2, dtype=float)
    M, N = np.meshgrid(m, m)
    signs = (-1.0) ** ((M - 1) / 2) * (-1.0) ** ((N - 1) / 2)
    return float(np.sum(16.0 * signs / (np.pi**4 * M * N * (M**2 + N**2))))


def verify_supersolution_static(ubar: Field, grid: Grid, params: PdeParams) -> ResidualReport:
    """
    Minimum over interior nodes of -Δ_p Ubar - |∇Ubar|^q.

    Returns:
        ResidualReport: Minimum residual and the node attaining it.
    """
    residual = -p_laplacian(ubar, grid, params.p).values - hamiltonian(ubar, grid, params.q).values
    interior = residual[1:-1, 1:-1]
    j, i = np.unravel_index(np.argmin(interior), interior.shape)
    return ResidualReport(
        min_residual=float(interior[j, i]),
        witness_node=(int(i) + 1, int(j) + 1),
        witness_point=(float(grid.x[i + 1]), float(grid.y[j + 1])),
        samples=int(interior.size),
    )


def barrier_field(V: Field, eps_V: float, mu: float, grid: Grid) -> Field:
    return Field(values=mu * (grid.mesh[1] + eps_V * V.values))


def _min_diffusion(V: Field, eps_V: float, grid: Grid, p: float) -> float:
    w = barrier_field(V, eps_V, 1.0, grid)
    return float(np.min(-p_laplacian(w, grid, p).values[1:-1, 1:-1]))


def barrier_eps(
    V: Field, grid: Grid, p: float, eps_fraction: float = 0.99, max_halvings: int = 30
) -> Tuple[float, int]:
    """
    Scale of U = eps*V.

    Starts at eps_fraction / (sup|V_x| + 2 sup|V_y|), which gives |U_y| <= 1/2, and
    halves until -Δ_p(y + eps*V) >= 0 at every interior node.

    Returns:
        Tuple[float, int]: (eps_V, number of halvings).
    """
    grad = gradient(V, grid)
    eps = eps_fraction / (np.max(np.abs(grad.ux)) + 2.0 * np.max(np.abs(grad.uy)))
    halvings = 0
    while _min_diffusion(V, eps, grid, p) < 0.0 and halvings < max_halvings:
        eps *= 0.5
        halvings += 1
    return float(eps), halvings


def barrier_properties(V: Field, eps_V: float, grid: Grid, rho: float) -> Dict[str, ConditionResult]:
    """Nodewise checks U > 0 on the interior and on [-rho/2, rho/2] x {0}, U = 0 elsewhere on
    the boundary away from (-rho, rho) x {0}, and |U_y| <= 1/2."""
    U = eps_V * V.values
    xx, _ = grid.mesh
    bottom = grid.boundary.bottom

    def witness(values, mask, worst):
        masked = np.where(mask, values, np.nan)
        flat = np.nanargmin(masked) if worst == "min" else np.nanargmax(masked)
        j, i = np.unravel_index(flat, values.shape)
        return float(values[j, i]), (int(i), int(j)), (float(grid.x[i]), float(grid.y[j]))

    positive_set = grid.boundary.interior | (bottom & (np.abs(xx) <= 0.5 * rho))
    value, node, xy = witness(U, positive_set, "min")
    checks = {"proppsi1": ConditionResult(passed=value > 0.0, worst_value=value, witness=node, witness_xy=xy)}

    zero_set = grid.boundary.any & ~(bottom & (np.abs(xx) < rho))
    value, node, xy = witness(np.abs(U), zero_set, "max")
    checks["proppsi2"] = ConditionResult(passed=value == 0.0, worst_value=value, witness=node, witness_xy=xy)

    Uy = np.abs(gradient(Field(values=U), grid).uy)
    value, node, xy = witness(Uy, np.ones(grid.shape, dtype=bool), "max")
    checks["proppsi3"] = ConditionResult(passed=value <= 0.5, worst_value=value, witness=node, witness_xy=xy)
    return checks


def find_mu0(
    V: Field,
    eps_V: float,
    grid: Grid,
    params: PdeParams,
    iterations: int = 40,
    tol: float = 1e-6,
    threshold: float = MU_THRESHOLD,
) -> float:
    """
    Largest mu in (0, 1] with min residual of mu*(y + eps_V*V) >= threshold, by bisection.

    Returns 0 when no tested mu passes.
    """

    def admissible(mu: float) -> bool:
        ubar = barrier_field(V, eps_V, mu, grid)
        return verify_supersolution_static(ubar, grid, params).min_residual >= threshold

    if admissible(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def mu0_closed_form(V: Field, eps_V: float, grid: Grid, params: PdeParams) -> float:
    """mu0^(q-p+1) = min over interior of (-Δ_p w)/|∇w|^q, w = y + eps_V*V (homogeneity of both terms)."""
    w = barrier_field(V, eps_V, 1.0, grid)
    diffusion = -p_laplacian(w, grid, params.p).values[1:-1, 1:-1]
    source = hamiltonian(w, grid, params.q).values[1:-1, 1:-1]
    ratio = np.min(diffusion / source)
    if ratio <= 0.0:
        return 0.0
    return float(ratio ** (1.0 / (params.q - params.p + 1.0)))


def assemble_global_barrier(
    V: Field,
    mu: float,
    params: PdeParams,
    grid: Grid,
    rho: float,
    eps_fraction: float = 0.99,
    search_mu0: bool = True,
) -> BarrierBundle:
    """
    Assemble Ubar = mu*(y + eps_V*V) and check its properties.

    Args:
        V (Field): Solution of the anisotropic elliptic problem.
        mu (float): Boundary slope used for Ubar.
        params (PdeParams): Exponents.
        grid (Grid): Owning grid.
        rho (float): Localization radius of the boundary profile.
        eps_fraction (float, optional): Fraction of 1/(sup|V_x| + 2 sup|V_y|). Defaults to 0.99.
        search_mu0 (bool, optional): Bisect for mu0_found. Defaults to True.

    Returns:
        BarrierBundle: Barrier, scale, property checks and residual report.
    """
    eps_V, halvings = barrier_eps(V, grid, params.p, eps_fraction)
    ubar = barrier_field(V, eps_V, mu, grid)
    bundle = BarrierBundle(
        V=V,
        eps_V=eps_V,
        eps_halvings=halvings,
        mu=mu,
        Ubar=ubar,
        residual_report=verify_supersolution_static(ubar, grid, params),
        properties=barrier_properties(V, eps_V, grid, rho),
    )
    if search_mu0:
        bundle.mu0_found = find_mu0(V, eps_V, grid, params)
        bundle.mu0_closed_form = mu0_closed_form(V, eps_V, grid, params)
        logger.info(
            f"mu0 found {bundle.mu0_found:.6g} (closed form {bundle.mu0_closed_form:.6g}), eps_V={eps_V:.4g}"
        )
    failing = [name for name, c in bundle.properties.items() if not c.passed]
    if failing:
        logger.warning(f"global barrier property checks failed: {failing}")
    return bundle


def build_global_barrier(
    grid: Grid,
    params: PdeParams,
    rho: float,
    method: SolveMethod = SolveMethod.CG,
    eps_fraction: float = 0.99,
) -> BarrierBundle:
    solution = solve_V(grid, params.p, rho, method)
    return assemble_global_barrier(solution.V, params.mu, params, grid, rho, eps_fraction)


def rho_sweep(
    grid: Grid, params: PdeParams, rhos: Sequence[float], method: SolveMethod = SolveMethod.CG
) -> List[Tuple[float, float]]:
    """(rho, mu0_found) for each localization radius."""
    out = []
    for rho in rhos:
        bundle = build_global_barrier(grid, params, rho, method)
        out.append((float(rho), float(bundle.mu0_found)))
    return out


def golden_section_eps(V: Field, grid: Grid, params: PdeParams, mu: float) -> Tuple[float, float]:
    """
    Exploratory: eps in (0, eps_max] maximizing the worst residual of mu*(y + eps*V).

    Not part of the barrier construction; eps_max is the sup-norm bound of ``barrier_eps``.

    Returns:
        Tuple[float, float]: (eps, worst residual at eps).
    """
    eps_max, _ = barrier_eps(V, grid, params.p, max_halvings=0)

    def negative_worst(eps: float) -> float:
        return -verify_supersolution_static(barrier_field(V, eps, mu, grid), grid, params).min_residual

    found = minimize_scalar(negative_worst, bounds=(1e-6 * eps_max, eps_max), method="bounded")
    return float(found.x), float(-found.fun)


def barrier_comparison(snapshots: Sequence[Field], ubar: Field) -> Tuple[float, float]:
    """max over snapshots of u - Ubar, with the time where it is attained."""
    worst, when = -np.inf, float("nan")
    for snap in snapshots:
        gap = float(np.max(snap.values - ubar.values))
        if gap > worst:
            worst, when = gap, snap.time
    return worst, when


def comparison_sections(
    snapshots: Sequence[Field],
    grid: Grid,
    bundle: Optional[BarrierBundle] = None,
    nondeg: Optional[NondegBarrierParams] = None,
    tol: float = 1e-8,
) -> Dict[str, ClaimSection]:
    """
    Discrete comparison against the barriers on a run's snapshots.

    ``global_barrier`` checks u <= Ubar + tol when u0 <= Ubar (not applicable otherwise);
    ``nondeg_comparison`` checks u <= v + 1e-6 inside the box when the parabolic-boundary
    ordering holds.
    """
    sections = {}
    if bundle is not None:
        if np.any(snapshots[0].values > bundle.Ubar.values + tol):
            sections["global_barrier"] = ClaimSection(
                name="global_barrier",
                status=ClaimStatus.INCONCLUSIVE,
                message="initial data exceed Ubar; comparison not applicable",
            )
        else:
            gap, when = barrier_comparison(snapshots, bundle.Ubar)
            sections["global_barrier"] = ClaimSection(
                name="global_barrier",
                status=ClaimStatus.PASS if gap <= tol else ClaimStatus.FAIL,
                witness=Witness(time=when, value=gap),
                values={"max_u_minus_Ubar": gap},
            )
    if nondeg is not None:
        applicable, gap = nondeg_comparison(snapshots, grid, nondeg)
        if not applicable:
            sections["nondeg_comparison"] = ClaimSection(
                name="nondeg_comparison",
                status=ClaimStatus.INCONCLUSIVE,
                message="u <= v fails on the parabolic boundary; comparison not applicable",
            )
        else:
            sections["nondeg_comparison"] = ClaimSection(
                name="nondeg_comparison",
                status=ClaimStatus.PASS if gap <= 1e-6 else ClaimStatus.FAIL,
                witness=Witness(value=gap),
                values={"max_u_minus_v": gap},
            )
    return sections
