from typing import Tuple

import numpy as np

from grid.schemas import Field, Grid
from operators.service import gradient
from scaling.schemas import ScalingExponents


def bernstein_monitor(
    u: Field, delta: Field, exps: ScalingExponents, grid: Grid
) -> Tuple[float, float]:
    """
    Boundary-distance weighted maxima of the gradient and of u.

    Interior nodes only: m_grad = max |∇u| * delta^beta and m_u = max u * delta^(-kappa).
    Bounded values across the blow-up window render the sharp profile
    |∇u| <= C delta^(-beta), u <= C delta^kappa.

    Returns:
        Tuple[float, float]: (m_grad, m_u).
    """
    interior = grid.boundary.interior
    d = delta.values[interior]
    g = gradient(u, grid).norm()[interior]
    m_grad = float(np.max(g * d**exps.beta))
    m_u = float(np.max(u.values[interior] * d ** (-exps.kappa)))
    return m_grad, m_u


def bottom_uy(u: Field, grid: Grid) -> np.ndarray:
    """|u_y| along the bottom edge (one-sided second-order difference)."""
    return np.abs(gradient(u, grid).uy[0, :])


def concentration_width(profile: np.ndarray, x: np.ndarray) -> float:
    """Length of the smallest symmetric interval holding every node with profile >= half its max."""
    peak = np.max(profile)
    if peak <= 0.0:
        return 0.0
    return float(2.0 * np.max(np.abs(x[profile >= 0.5 * peak])))


def off_center_gradient(u: Field, grid: Grid, rho: float) -> float:
    """max |∇u| over bottom nodes with |x| >= rho and over the other three edges."""
    g = gradient(u, grid).norm()
    bottom = np.abs(grid.x) >= rho
    others = np.concatenate([g[-1, :], g[:, 0], g[:, -1]])
    return float(max(np.max(g[0, bottom]), np.max(others)))
