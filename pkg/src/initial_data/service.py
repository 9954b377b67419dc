from typing import Optional, Tuple
import logging

import numpy as np

from grid.schemas import Field, Grid
from helpers.exceptions import InitialDataError
from initial_data.schemas import ConditionResult, InitialDataSpec, ValidationReport
from operators.service import gradient
from scaling.schemas import ScalingExponents

logger = logging.getLogger(__name__)

# sup |phi'| of the quintic smoothstep cutoff on its transition of width 1/3
PHI_PRIME_MAX = 45.0 / 8.0

TOL = 1e-12


def _smoothstep(t):
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def cutoff_phi(s, plateau: float = 1.0 / 3.0, support: float = 2.0 / 3.0):
    """
    Even C^2 cutoff: 1 for |s| <= plateau, 0 for |s| >= support, quintic smoothstep between.

    Args:
        s (float | np.ndarray): Argument.
        plateau (float, optional): End of the plateau. Defaults to 1/3.
        support (float, optional): End of the support. Defaults to 2/3.

    Returns:
        float | np.ndarray: phi(s), non-increasing in |s|.
    """
    t = np.clip((np.abs(s) - plateau) / (support - plateau), 0.0, 1.0)
    out = 1.0 - _smoothstep(t)
    return float(out) if np.ndim(out) == 0 else out


def cutoff_phi_prime(s, plateau: float = 1.0 / 3.0, support: float = 2.0 / 3.0):
    width = support - plateau
    t = np.clip((np.abs(s) - plateau) / width, 0.0, 1.0)
    out = -np.sign(s) * 30.0 * t * t * (1.0 - t) ** 2 / width
    return float(out) if np.ndim(out) == 0 else out


def psi_eps(y, eps: float, L2: float, plateau: float = 1.0 / 3.0, support: float = 2.0 / 3.0):
    """
    Vertical profile: phi((y - eps)/eps) for 0 <= y <= eps, phi((y - eps)/L2) for y >= eps.

    Continuous at y = eps with value 1; vanishes outside [eps/3, 3*L2/4] when eps <= L2/12.
    """
    y = np.asarray(y, dtype=float)
    lower = cutoff_phi((y - eps) / eps, plateau, support)
    upper = cutoff_phi((y - eps) / L2, plateau, support)
    out = np.where(y <= eps, lower, upper)
    return float(out) if np.ndim(out) == 0 else out


def _resolve_mu(spec: InitialDataSpec, mu: Optional[float]) -> float:
    value = spec.mu if mu is None else mu
    if value is None:
        raise InitialDataError("initial data need the boundary slope mu")
    return value


def check_eps(spec: InitialDataSpec, grid: Grid) -> None:
    """
    Reject scales for which the bump is undefined or leaves the domain.

    Raises:
        InitialDataError: If eps >= min(L1, L2/2) or the support meets the boundary.
    """
    domain = grid.spec
    if not spec.eps < min(domain.L1, domain.L2 / 2.0):
        raise InitialDataError(
            f"eps={spec.eps} must be < min(L1, L2/2) = {min(domain.L1, domain.L2 / 2.0)}"
        )
    x_extent = spec.support * spec.eps
    y_extent = spec.eps + spec.support * domain.L2
    if not (x_extent < domain.half_width and y_extent < domain.height):
        raise InitialDataError(
            f"bump support |x| < {x_extent}, y < {y_extent} exits the domain"
        )


def build_initial_data(
    spec: InitialDataSpec, grid: Grid, exps: ScalingExponents, mu: Optional[float] = None
) -> Field:
    """
    Sample the well-prepared initial data on the grid.

    Args:
        spec (InitialDataSpec): Bump parameters.
        grid (Grid): Target grid.
        exps (ScalingExponents): Supplies kappa.
        mu (float, optional): Overrides ``spec.mu``.

    Returns:
        Field: u0 = mu*y + A*eps^kappa*phi(x/eps)*psi_eps(y), exactly mu*y on boundary nodes.

    Raises:
        InitialDataError: If the bump support exits the domain.
    """
    mu = _resolve_mu(spec, mu)
    check_eps(spec, grid)
    xx, yy = grid.mesh
    bump = (
        spec.amplitude
        * spec.eps**exps.kappa
        * cutoff_phi(xx / spec.eps, spec.plateau, spec.support)
        * psi_eps(yy, spec.eps, grid.spec.L2, spec.plateau, spec.support)
    )
    u0 = mu * yy + bump
    boundary = grid.boundary.any
    u0[boundary] = grid.boundary_values(mu)[boundary]
    return Field(values=u0, time=0.0)


def _condition(values: np.ndarray, mask: np.ndarray, grid: Grid, worst: str, ok, detail=""):
    masked = np.where(mask, values, np.nan)
    if not np.any(mask):
        return ConditionResult(passed=False, worst_value=float("nan"), detail="no nodes in region")
    flat = np.nanargmax(masked) if worst == "max" else np.nanargmin(masked)
    j, i = np.unravel_index(flat, values.shape)
    value = float(values[j, i])
    return ConditionResult(
        passed=bool(ok(value)),
        worst_value=value,
        witness=(int(i), int(j)),
        witness_xy=(float(grid.x[i]), float(grid.y[j])),
        detail=detail,
    )


def validate_initial_data(
    u0: Field,
    spec: InitialDataSpec,
    grid: Grid,
    exps: ScalingExponents,
    mu: Optional[float] = None,
) -> ValidationReport:
    """
    Check the five well-preparedness conditions with discrete derivatives.

    Conditions: ``don00`` mirror symmetry (bitwise), ``don0b`` u_x <= 0 for x > 0,
    ``don1b`` u_y >= mu/2, ``don0b2c`` u0 <= mu*(y + c*indicator of (-rho/2, rho/2) x (0, L2)),
    ``don4b`` u0 >= A*eps^kappa in the ball of radius eps/3 around (0, eps).
    ``notes`` record the scale conditions eps <= min(L1, L2/12) and eps <= rho/2.

    Returns:
        ValidationReport: Per-condition results; failures carry the worst node.
    """
    mu = _resolve_mu(spec, mu)
    domain = grid.spec
    xx, yy = grid.mesh
    U = u0.values
    grad = gradient(u0, grid)
    everywhere = np.ones(grid.shape, dtype=bool)

    defect = np.abs(U - U[:, ::-1])
    conditions = {
        "don00": _condition(defect, everywhere, grid, "max", lambda v: v == 0.0),
        "don0b": _condition(grad.ux, xx > 0.0, grid, "max", lambda v: v <= TOL),
        "don1b": _condition(grad.uy, everywhere, grid, "min", lambda v: v >= 0.5 * mu - TOL),
    }

    indicator = (np.abs(xx) < 0.5 * domain.rho) & (yy > 0.0) & (yy < domain.L2)
    excess = U - mu * (yy + spec.loc_c * indicator)
    conditions["don0b2c"] = _condition(excess, everywhere, grid, "max", lambda v: v <= TOL)

    floor = spec.amplitude * spec.eps**exps.kappa
    ball = xx**2 + (yy - spec.eps) ** 2 < (spec.eps / 3.0) ** 2
    conditions["don4b"] = _condition(
        U, ball, grid, "min", lambda v: v >= floor * (1.0 - TOL), detail=f"floor={floor}"
    )

    scale_limit = min(domain.L1, domain.L2 / 12.0)
    notes = {
        "support_control": ConditionResult(
            passed=spec.eps <= scale_limit,
            worst_value=spec.eps,
            detail=f"eps <= min(L1, L2/12) = {scale_limit}",
        ),
        "localization_radius": ConditionResult(
            passed=spec.eps <= 0.5 * domain.rho,
            worst_value=spec.eps,
            detail=f"eps <= rho/2 = {0.5 * domain.rho}",
        ),
    }
    report = ValidationReport(conditions=conditions, notes=notes)
    if not report.passed:
        logger.info(f"initial data fail conditions {report.failures()}")
    return report


def admissible_eps_bound(spec: InitialDataSpec, L2: float, exps: ScalingExponents, mu: Optional[float] = None) -> float:
    """Closed-form sufficient scale for u_y >= mu/2: eps^kappa <= mu*L2/(2*A*sup|phi'|)."""
    mu = _resolve_mu(spec, mu)
    return (mu * L2 / (2.0 * spec.amplitude * PHI_PRIME_MAX)) ** (1.0 / exps.kappa)


def locate_admissibility_boundary(
    spec: InitialDataSpec,
    grid: Grid,
    exps: ScalingExponents,
    bracket: Tuple[float, float],
    iterations: int = 30,
    mu: Optional[float] = None,
) -> Tuple[float, float]:
    """
    Bisect eps on the discrete u_y >= mu/2 check.

    Args:
        spec (InitialDataSpec): Template spec; only ``eps`` varies.
        grid (Grid): Grid used for the discrete check.
        exps (ScalingExponents): Supplies kappa.
        bracket (Tuple[float, float]): (eps passing, eps failing).
        iterations (int, optional): Bisection steps. Defaults to 30.

    Returns:
        Tuple[float, float]: Final (passing, failing) bracket.
    """
    mu = _resolve_mu(spec, mu)

    def admissible(eps: float) -> bool:
        trial = spec.model_copy(update={"eps": eps})
        u0 = build_initial_data(trial, grid, exps, mu)
        return validate_initial_data(u0, trial, grid, exps, mu).conditions["don1b"].passed

    lo, hi = bracket
    if not admissible(lo) or admissible(hi):
        raise InitialDataError(f"bracket {bracket} does not straddle the admissibility boundary")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi
