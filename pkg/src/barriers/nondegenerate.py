from typing import Dict, NamedTuple, Optional, Sequence, Tuple
import logging

import numpy as np

from barriers.schemas import NondegBarrierParams, NondegRegionMap, ResidualReport
from grid.schemas import Field, Grid
from scaling.schemas import PdeParams

logger = logging.getLogger(__name__)

CHUNK = 250_000


class NondegDerivatives(NamedTuple):
    v: np.ndarray
    vt: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    vxx: np.ndarray
    vyy: np.ndarray
    vxy: np.ndarray


def nondeg_barrier(bp: NondegBarrierParams, x, y, t) -> NondegDerivatives:
    """
    v = eps0*y*W^(-beta) and its closed-form derivatives, W = y + eta*(r^2 - (x - x0)^2)*(t - t0).

    Args:
        bp (NondegBarrierParams): Barrier parameters.
        x, y, t: Broadcastable evaluation points with y > 0 or t > t0.

    Returns:
        NondegDerivatives: v, v_t, v_x, v_y, v_xx, v_yy, v_xy.
    """
    x, y, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(t, float))
    eps, eta, beta = bp.eps0, bp.eta, bp.beta
    xi = x - bp.x0
    tau = t - bp.t0
    s = bp.r**2 - xi**2
    W = y + eta * s * tau
    Wb = W ** (-beta)
    Wb1 = Wb / W
    ratio = y / W

    v = eps * y * Wb
    vt = -eps * beta * eta * y * s * Wb1
    vx = 2.0 * eps * beta * eta * y * xi * tau * Wb1
    vy = eps * Wb * (1.0 - beta * ratio)
    vxx = 2.0 * eps * beta * eta * tau * Wb1 * (y + 2.0 * (beta + 1.0) * eta * xi**2 * tau * ratio)
    vyy = eps * beta * Wb1 * (-2.0 + (beta + 1.0) * ratio)
    vxy = 2.0 * eps * beta * eta * xi * tau * Wb1 * (1.0 - (beta + 1.0) * ratio)
    return NondegDerivatives(v, vt, vx, vy, vxx, vyy, vxy)


def p_laplacian_closed(d: NondegDerivatives, p: float) -> np.ndarray:
    """Δ_p v = |∇v|^(p-2) [Δv + (p-2)(vx^2 vxx + 2 vx vy vxy + vy^2 vyy)/|∇v|^2]."""
    g2 = d.vx**2 + d.vy**2
    lap = d.vxx + d.vyy
    hess = d.vx**2 * d.vxx + 2.0 * d.vx * d.vy * d.vxy + d.vy**2 * d.vyy
    return g2 ** ((p - 2.0) / 2.0) * (lap + (p - 2.0) * hess / g2)


def nondeg_residual(bp: NondegBarrierParams, params: PdeParams, x, y, t) -> np.ndarray:
    d = nondeg_barrier(bp, x, y, t)
    grad_q = (d.vx**2 + d.vy**2) ** (params.q / 2.0)
    return d.vt - p_laplacian_closed(d, params.p) - grad_q


def sample_box(bp: NondegBarrierParams, n: int, rng: np.random.Generator):
    """Uniform samples of (x0 - r, x0 + r) x (0, d] x (t0, T)."""
    x = bp.x0 + bp.r * rng.uniform(-1.0, 1.0, n)
    y = bp.d * (1.0 - rng.uniform(0.0, 1.0, n))
    t = rng.uniform(bp.t0, bp.T, n)
    return x, y, t


def verify_nondeg_barrier(
    bp: NondegBarrierParams, params: PdeParams, samples: int = 1_000_000, seed: int = 0
) -> ResidualReport:
    """
    Minimum of v_t - Δ_p v - |∇v|^q over seeded uniform samples of the box.

    Args:
        bp (NondegBarrierParams): Barrier parameters.
        params (PdeParams): Exponents.
        samples (int, optional): Number of sampled points. Defaults to 10^6.
        seed (int, optional): Generator seed. Defaults to 0.

    Returns:
        ResidualReport: Minimum residual with the sample point (x, y, t) attaining it.
    """
    if not bp.eta_admissible:
        logger.warning(f"eta={bp.eta} exceeds d/(T r^2)={bp.eta_limit:.4g}")
    rng = np.random.default_rng(seed)
    worst, point = np.inf, None
    remaining = samples
    while remaining > 0:
        n = min(CHUNK, remaining)
        x, y, t = sample_box(bp, n, rng)
        res = nondeg_residual(bp, params, x, y, t)
        k = int(np.argmin(res))
        if res[k] < worst:
            worst, point = float(res[k]), (float(x[k]), float(y[k]), float(t[k]))
        remaining -= n
    return ResidualReport(min_residual=worst, witness_point=point, samples=samples)


def derivative_defects(
    bp: NondegBarrierParams, x: float, y: float, t: float, h: float = 1e-6
) -> Dict[str, float]:
    """
    Relative errors of the closed forms against central differences.

    First derivatives are differenced from v, second derivatives from the closed-form
    first derivatives. Meant for points with y away from 0.
    """

    def rel(exact: float, approx: float) -> float:
        return abs(exact - approx) / max(abs(exact), 1e-300)

    d = nondeg_barrier(bp, x, y, t)
    px, mx = nondeg_barrier(bp, x + h, y, t), nondeg_barrier(bp, x - h, y, t)
    py, my = nondeg_barrier(bp, x, y + h, t), nondeg_barrier(bp, x, y - h, t)
    pt, mt = nondeg_barrier(bp, x, y, t + h), nondeg_barrier(bp, x, y, t - h)
    c = 0.5 / h
    return {
        "vt": rel(d.vt, c * (pt.v - mt.v)),
        "vx": rel(d.vx, c * (px.v - mx.v)),
        "vy": rel(d.vy, c * (py.v - my.v)),
        "vxx": rel(d.vxx, c * (px.vx - mx.vx)),
        "vyy": rel(d.vyy, c * (py.vy - my.vy)),
        "vxy": rel(d.vxy, c * (py.vx - my.vx)),
    }


def map_validity_region(
    base: NondegBarrierParams,
    params: PdeParams,
    eps_values: Sequence[float],
    eta_values: Sequence[float],
    samples: int = 20_000,
    seed: int = 0,
) -> NondegRegionMap:
    """Sampled min residual per (eps0, eta) cell; cells with eta > d/(T r^2) stay NaN."""
    eps_values = np.asarray(eps_values, float)
    eta_values = np.asarray(eta_values, float)
    table = np.full((eps_values.size, eta_values.size), np.nan)
    for a, eps in enumerate(eps_values):
        for b, eta in enumerate(eta_values):
            bp = base.model_copy(update={"eps0": float(eps), "eta": float(eta)})
            if not bp.eta_admissible:
                continue
            table[a, b] = verify_nondeg_barrier(bp, params, samples, seed).min_residual
    region = NondegRegionMap(
        eps_values=eps_values, eta_values=eta_values, min_residual=table, samples=samples
    )
    logger.info(f"nondegeneracy map: {len(region.valid_cells())} of {table.size} cells valid")
    return region


def nondeg_comparison(
    snapshots: Sequence[Field], grid: Grid, bp: NondegBarrierParams, tol: float = 1e-6
) -> Tuple[bool, Optional[float]]:
    """
    Discrete comparison u <= v inside |x - x0| < r, 0 < y < d on snapshots in [t0, T].

    Applicable only when u <= v holds on the parabolic boundary: the first snapshot in
    the window and the box edges at every later one.

    Returns:
        Tuple[bool, Optional[float]]: (applicable, max of u - v over interior box nodes).
    """
    cols = np.nonzero(np.abs(grid.x - bp.x0) <= bp.r)[0]
    rows = np.nonzero(grid.y <= bp.d)[0]
    window = [s for s in snapshots if bp.t0 <= s.time <= bp.T]
    if len(window) < 2 or cols.size < 3 or rows.size < 3:
        return False, None
    X, Y = np.meshgrid(grid.x[cols], grid.y[rows])
    edge = np.zeros(X.shape, dtype=bool)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True

    worst = -np.inf
    for n, snap in enumerate(window):
        # the row y = 0 has v = 0 and W = 0 at t = t0; the barrier is taken as 0 there
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(Y > 0.0, nondeg_barrier(bp, X, Y, snap.time).v, 0.0)
        gap = snap.values[np.ix_(rows, cols)] - v
        boundary = np.ones(X.shape, dtype=bool) if n == 0 else edge
        if np.max(gap[boundary]) > tol:
            return False, None
        worst = max(worst, float(np.max(gap[~edge])))
    return True, worst
