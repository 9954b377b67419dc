from typing import Tuple

import numpy as np

from diagnostics.schemas import JField, JParams
from grid.schemas import Field, Grid
from operators.service import gradient


def _region(grid: Grid, x1: float, y1: float, include_bottom: bool):
    cols = np.nonzero((grid.x > 0.0) & (grid.x < x1))[0]
    lower = 0.0 if include_bottom else np.nextafter(0.0, 1.0)
    rows = np.nonzero((grid.y >= lower) & (grid.y < y1))[0]
    return rows, cols


def weight_term(u_block: np.ndarray, xs: np.ndarray, ys: np.ndarray, jp: JParams) -> np.ndarray:
    """k*x*y^(-gamma)*u^alpha; extended by 0 on the row y = 0."""
    X, Y = np.meshgrid(xs, ys)
    out = np.zeros_like(u_block)
    pos = Y > 0.0
    u_pos = np.maximum(u_block[pos], 0.0)
    out[pos] = jp.k * X[pos] * Y[pos] ** (-jp.gamma) * u_pos**jp.alpha
    return out


def evaluate_J(u: Field, jp: JParams, grid: Grid) -> JField:
    """
    J = u_x + k*x*y^(-gamma)*u^alpha on the nodes of D = (0, x1) x (0, y1).

    The weight term vanishes continuously at y = 0 (u <= C*y and alpha - gamma > 1),
    so the bottom row carries u_x alone.

    Args:
        u (Field): Solution snapshot, positive in D.
        jp (JParams): Validated J parameters.
        grid (Grid): Owning grid.

    Returns:
        JField: Values on D with the maximum and its (x, y) location.
    """
    rows, cols = _region(grid, jp.x1, jp.y1, include_bottom=True)
    ux = gradient(u, grid).ux[np.ix_(rows, cols)]
    xs, ys = grid.x[cols], grid.y[rows]
    block = u.values[np.ix_(rows, cols)]
    J = ux + weight_term(block, xs, ys, jp)
    j, i = np.unravel_index(np.argmax(J), J.shape)
    return JField(
        values=J, xs=xs, ys=ys, max_value=float(J[j, i]), witness=(float(xs[i]), float(ys[j]))
    )


def weight_argmax(u: Field, jp: JParams, grid: Grid) -> Tuple[float, float]:
    rows, cols = _region(grid, jp.x1, jp.y1, include_bottom=True)
    xs, ys = grid.x[cols], grid.y[rows]
    w = weight_term(u.values[np.ix_(rows, cols)], xs, ys, jp)
    j, i = np.unravel_index(np.argmax(w), w.shape)
    return float(xs[i]), float(ys[j])


def weighted_profile(u: Field, jp: JParams, grid: Grid) -> float:
    """sup over the interior of D of u * x^(2/(alpha-1)) * y^(-(1-2*sigma))."""
    rows, cols = _region(grid, jp.x1, jp.y1, include_bottom=False)
    X, Y = np.meshgrid(grid.x[cols], grid.y[rows])
    block = u.values[np.ix_(rows, cols)]
    profile = block * X ** (2.0 / (jp.alpha - 1.0)) * Y ** (-(1.0 - 2.0 * jp.sigma))
    return float(np.max(profile))


def corner_check(u: Field, x1: float, y1: float, grid: Grid) -> Tuple[float, Tuple[float, float]]:
    """
    inf over the interior of (0, x1) x (0, y1) of -u_x / (x*y).

    A positive value is the corner separation u_x <= -c*x*y.

    Returns:
        Tuple[float, Tuple[float, float]]: (infimum, (x, y) of the minimizing node).
    """
    rows, cols = _region(grid, x1, y1, include_bottom=False)
    X, Y = np.meshgrid(grid.x[cols], grid.y[rows])
    ux = gradient(u, grid).ux[np.ix_(rows, cols)]
    ratio = -ux / (X * Y)
    j, i = np.unravel_index(np.argmin(ratio), ratio.shape)
    return float(ratio[j, i]), (float(X[j, i]), float(Y[j, i]))


def j_bottom_continuity(u: Field, jp: JParams, grid: Grid) -> Tuple[float, float]:
    """
    Weight term on the row y = hy against k*C^alpha*x*hy^(alpha-gamma).

    C is the empirical slope max u/hy on that row, so the bound tends to 0 with hy.

    Returns:
        Tuple[float, float]: (max weight on the row, max bound on the row).
    """
    cols = np.nonzero((grid.x > 0.0) & (grid.x < jp.x1))[0]
    hy = grid.y[1]
    row = np.maximum(u.values[1, cols], 0.0)
    xs = grid.x[cols]
    weight = jp.k * xs * hy ** (-jp.gamma) * row**jp.alpha
    slope = float(np.max(row)) / hy
    bound = jp.k * slope**jp.alpha * xs * hy ** (jp.alpha - jp.gamma)
    return float(np.max(weight)), float(np.max(bound))
