from typing import Dict, List, Optional
import logging

import numpy as np

from diagnostics.j_functional import corner_check, evaluate_J, j_bottom_continuity, weighted_profile
from diagnostics.profiles import bottom_uy, concentration_width, off_center_gradient
from diagnostics.schemas import ClaimSection, ClaimStatus, DiagnosticsReport, JParams, Witness
from evolution.monitors import right_half_columns
from evolution.schemas import RunResult
from grid.schemas import Field, Grid
from helpers.exceptions import DiagnosticError, HypothesisViolation
from operators.schemas import HamiltonianScheme
from operators.service import gradient, rhs
from scaling.schemas import PdeParams

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10
MONOTONE_TOL = 1e-8
FLOOR_TOL = 1e-6
J_TOL = 1e-6
K_MIN = 1e-6
WINDOW_STARTS = (0.4, 0.5, 0.6)


def _status(ok: bool) -> ClaimStatus:
    return ClaimStatus.PASS if ok else ClaimStatus.FAIL


def _require_nondegenerate(params: PdeParams) -> None:
    if not params.nondegenerate:
        raise HypothesisViolation("diagnostics need mu > 0; mu = 0 runs are exploratory only")


def _node_witness(values: np.ndarray, grid: Grid, time: float, worst: str) -> Witness:
    flat = np.nanargmax(values) if worst == "max" else np.nanargmin(values)
    j, i = np.unravel_index(flat, values.shape)
    return Witness(node=(int(i), int(j)), x=float(grid.x[i]), y=float(grid.y[j]), time=time, value=float(values[j, i]))


def check_symmetry_monotonicity(result: RunResult, params: PdeParams, grid: Grid) -> Dict[str, ClaimSection]:
    """
    Mirror symmetry, u_x <= 0 on the right half and the gradient floor u_y >= mu/2.

    The symmetry defect is the pre-symmetrization one recorded per step. The u_x check
    skips the column next to x = 0; its value is recorded as ``band_max_ux``.

    Args:
        result (RunResult): Completed run.
        params (PdeParams): Problem parameters, mu > 0.
        grid (Grid): Owning grid.

    Returns:
        Dict[str, ClaimSection]: Sections ``don3``, ``don4`` and ``don1``.

    Raises:
        HypothesisViolation: If mu = 0.
    """
    _require_nondegenerate(params)
    defects = [row.symmetry_defect for row in result.series] or [0.0]
    worst = int(np.argmax(defects))
    defect = float(defects[worst])
    don3 = ClaimSection(
        name="don3",
        status=_status(defect <= SYMMETRY_TOL),
        witness=Witness(time=result.series[worst].t if result.series else 0.0, value=defect),
        values={"max_symmetry_defect": defect, "tolerance": SYMMETRY_TOL},
    )

    right = right_half_columns(grid)
    band = grid.center + 1
    max_ux, ux_witness, band_ux = -np.inf, None, -np.inf
    min_uy, uy_witness = np.inf, None
    for snap in result.snapshots:
        grad = gradient(snap, grid)
        ux = np.full(grid.shape, np.nan)
        ux[:, right] = grad.ux[:, right]
        if np.nanmax(ux) > max_ux:
            max_ux = float(np.nanmax(ux))
            ux_witness = _node_witness(ux, grid, snap.time, "max")
        band_ux = max(band_ux, float(np.max(grad.ux[:, band])))
        if np.min(grad.uy) < min_uy:
            min_uy = float(np.min(grad.uy))
            uy_witness = _node_witness(grad.uy, grid, snap.time, "min")

    step_max_ux = max((row.max_ux_right_half for row in result.series), default=max_ux)
    step_min_uy = min((row.min_uy for row in result.series), default=min_uy)
    don4 = ClaimSection(
        name="don4",
        status=_status(max(max_ux, step_max_ux) <= MONOTONE_TOL),
        witness=ux_witness,
        values={"max_ux": max_ux, "max_ux_all_steps": step_max_ux, "band_max_ux": band_ux},
    )
    floor = 0.5 * params.mu
    don1 = ClaimSection(
        name="don1",
        status=_status(min(min_uy, step_min_uy) >= floor - FLOOR_TOL),
        witness=uy_witness,
        values={"min_uy": min_uy, "min_uy_all_steps": step_min_uy, "delta0": floor},
    )
    return {"don3": don3, "don4": don4, "don1": don1}


def time_derivative_constant(
    u0: Field, grid: Grid, params: PdeParams, scheme: HamiltonianScheme = HamiltonianScheme.CENTRAL
) -> float:
    """C1 = max |Δ_p u0 + |∇u0|^q| over interior nodes."""
    return float(np.max(np.abs(rhs(u0, grid, params, scheme).values)))


def time_derivative_bound(
    result: RunResult, u0: Field, grid: Grid, params: PdeParams, tol: float = 0.05
) -> ClaimSection:
    """max over accepted steps of |u_t| against C1*(1 + tol)."""
    c1 = time_derivative_constant(u0, grid, params, result.hamiltonian_scheme)
    rows = result.series
    if not rows:
        return ClaimSection(name="ut_bound", status=ClaimStatus.PASS, values={"C1": c1, "max_ut": 0.0})
    ut = [row.max_ut_abs for row in rows]
    k = int(np.argmax(ut))
    return ClaimSection(
        name="ut_bound",
        status=_status(ut[k] <= c1 * (1.0 + tol)),
        witness=Witness(time=rows[k].t, value=float(ut[k])),
        values={"C1": c1, "max_ut": float(ut[k]), "ratio": float(ut[k] / c1) if c1 > 0 else float("inf")},
    )


def _half_row(result: RunResult):
    half = 0.5 * result.t_final
    for row in result.series:
        if row.t >= half:
            return row
    return result.series[-1]


def bernstein_section(result: RunResult, min_growth: float = 20.0, max_ratio: float = 3.0) -> ClaimSection:
    """
    Boundedness of the Bernstein monitors across (T_num/2, T_num).

    Inconclusive when max|∇u| grows by less than ``min_growth`` over the window.
    """
    if not result.series:
        return ClaimSection(name="bernstein", status=ClaimStatus.INCONCLUSIVE, message="no accepted steps")
    half, last = _half_row(result), result.series[-1]
    growth = last.max_grad / half.max_grad
    ratio_grad = last.bernstein_grad / half.bernstein_grad
    ratio_u = last.bernstein_u / half.bernstein_u
    values = {
        "C0_grad": max(r.bernstein_grad for r in result.series),
        "C0_u": max(r.bernstein_u for r in result.series),
        "growth": growth,
        "ratio_grad": ratio_grad,
        "ratio_u": ratio_u,
    }
    series = {
        "t": [r.t for r in result.series],
        "bernstein_grad": [r.bernstein_grad for r in result.series],
        "bernstein_u": [r.bernstein_u for r in result.series],
    }
    if growth < min_growth:
        return ClaimSection(
            name="bernstein",
            status=ClaimStatus.INCONCLUSIVE,
            values=values,
            series=series,
            message=f"max|grad u| grew {growth:.3g}x over the window, below {min_growth}x",
        )
    worst = max(ratio_grad, ratio_u)
    return ClaimSection(
        name="bernstein",
        status=_status(worst <= max_ratio),
        witness=Witness(time=last.t, value=worst),
        values=values,
        series=series,
    )


def gbu_localization(
    result: RunResult,
    grid: Grid,
    rho: float,
    max_off_center_growth: float = 5.0,
    min_center_growth: float = 50.0,
) -> ClaimSection:
    """
    Blow-up localization at the origin.

    Checks, on the snapshots of (T_num/2, T_num], that the bottom-edge argmax of |u_y|
    is within one cell of x = 0; that the gradient on {|x| >= rho} x {0} and on the other
    edges stays within ``max_off_center_growth`` of its initial value while the center
    value grows by ``min_center_growth``; and that the half-maximum width does not widen.

    Raises:
        DiagnosticError: If the run did not end in gradient blow-up.
    """
    if not result.blew_up:
        raise DiagnosticError(f"localization needs a blow-up run, got {result.status.value}")
    first, last = result.snapshots[0], result.snapshots[-1]
    half = result.nearest_snapshot(0.5 * result.t_final)
    late = result.window(0.5)

    offsets = []
    for snap in late:
        offsets.append(int(np.argmax(bottom_uy(snap, grid))) - grid.center)
    worst_offset = max(offsets, key=abs)

    off0 = off_center_gradient(first, grid, rho)
    off_growth = max(off_center_gradient(s, grid, rho) for s in result.snapshots) / off0
    center_growth = bottom_uy(last, grid)[grid.center] / bottom_uy(first, grid)[grid.center]
    widths = [concentration_width(bottom_uy(s, grid), grid.x) for s in result.snapshots]
    width_half = concentration_width(bottom_uy(half, grid), grid.x)
    width_final = widths[-1]
    share = [
        off_center_gradient(s, grid, rho) / float(np.max(gradient(s, grid).norm())) for s in result.snapshots
    ]

    values = {
        "argmax_offsets": offsets,
        "off_center_growth": off_growth,
        "center_growth": center_growth,
        "width_half": width_half,
        "width_final": width_final,
    }
    series = {"t": result.snapshot_times(), "width": widths, "off_center_share": share}
    ok = abs(worst_offset) <= 1 and off_growth <= max_off_center_growth and width_final <= width_half
    if ok and center_growth < min_center_growth:
        return ClaimSection(
            name="localization",
            status=ClaimStatus.INCONCLUSIVE,
            values=values,
            series=series,
            message=f"center |u_y| grew {center_growth:.3g}x, below {min_center_growth}x",
        )
    column = grid.center + worst_offset
    witness = Witness(
        node=(column, 0),
        x=float(grid.x[column]),
        y=0.0,
        time=late[offsets.index(worst_offset)].time,
        value=off_growth,
    )
    return ClaimSection(
        name="localization",
        status=_status(ok),
        witness=witness,
        values=values,
        series=series,
    )


def max_J_over_window(snapshots: List[Field], jp: JParams, grid: Grid) -> Witness:
    best = Witness(value=-np.inf)
    for snap in snapshots:
        J = evaluate_J(snap, jp, grid)
        if J.max_value > best.value:
            best = Witness(x=J.witness[0], y=J.witness[1], time=snap.time, value=J.max_value)
    return best


def j_sign_section(result: RunResult, jp: JParams, grid: Grid, k0: float = 1.0) -> ClaimSection:
    """
    Search k for max J <= 0 over D x (T_num/2, T_num).

    k is halved from ``k0`` until max J <= 1e-6 over the window; below k = 1e-6 the
    claim is inconclusive. The window start is varied over 0.4, 0.5 and 0.6 of T_num
    at the final k.
    """
    window = result.window(0.5)
    k = k0
    tried: List[float] = []
    maxima: List[float] = []
    while True:
        best = max_J_over_window(window, jp.with_k(k), grid)
        tried.append(k)
        maxima.append(best.value)
        if best.value <= J_TOL or k * 0.5 < K_MIN:
            break
        k *= 0.5

    found = best.value <= J_TOL
    chosen = jp.with_k(k)
    sensitivity = {
        f"{start:.1f}": max_J_over_window(result.window(start), chosen, grid).value for start in WINDOW_STARTS
    }
    weight, bound = j_bottom_continuity(result.snapshots[-1], chosen, grid)
    values = {
        "k": k,
        "gamma": jp.gamma,
        "max_J": best.value,
        "window_sensitivity": sensitivity,
        "bottom_row_weight": weight,
        "bottom_row_bound": bound,
    }
    series = {"k": tried, "max_J": maxima}
    if not found:
        logger.warning(f"no k >= {K_MIN} gives max J <= {J_TOL}; last max J = {best.value:.4g}")
        return ClaimSection(
            name="J_sign",
            status=ClaimStatus.INCONCLUSIVE,
            witness=best,
            values=values,
            series=series,
            message=f"max J > {J_TOL} for every tested k down to {k:.3g}",
        )
    return ClaimSection(name="J_sign", status=ClaimStatus.PASS, witness=best, values=values, series=series)


def weighted_profile_section(result: RunResult, jp: JParams, grid: Grid, max_ratio: float = 3.0) -> ClaimSection:
    half = result.nearest_snapshot(0.5 * result.t_final)
    last = result.snapshots[-1]
    start, end = weighted_profile(half, jp, grid), weighted_profile(last, jp, grid)
    ratio = end / start
    window = result.window(0.5)
    return ClaimSection(
        name="weighted_profile",
        status=_status(ratio <= max_ratio),
        witness=Witness(time=last.time, value=end),
        values={"sup_half": start, "sup_final": end, "ratio": ratio},
        series={"t": [s.time for s in window], "sup": [weighted_profile(s, jp, grid) for s in window]},
    )


def corner_section(result: RunResult, jp: JParams, grid: Grid) -> ClaimSection:
    snap = result.nearest_snapshot(0.5 * result.t_final)
    value, (x, y) = corner_check(snap, jp.x1, jp.y1, grid)
    return ClaimSection(
        name="corner",
        status=_status(value > 0.0),
        witness=Witness(x=x, y=y, time=snap.time, value=value),
        values={"corner_coefficient": value},
    )


def _inconclusive(name: str, message: str) -> ClaimSection:
    return ClaimSection(name=name, status=ClaimStatus.INCONCLUSIVE, message=message)


def diagnose(
    result: RunResult,
    u0: Field,
    grid: Grid,
    params: PdeParams,
    jp: JParams,
    rho: float,
    extra: Optional[Dict[str, ClaimSection]] = None,
) -> DiagnosticsReport:
    """
    Evaluate every checkable claim on a completed run.

    Sections needing the blow-up window (bernstein, localization, J_sign, corner,
    weighted_profile) are inconclusive when the run did not blow up.

    Args:
        result (RunResult): Completed run.
        u0 (Field): Its initial data.
        grid (Grid): Owning grid.
        params (PdeParams): Problem parameters, mu > 0.
        jp (JParams): J parameters; k is the starting value of the k-search.
        rho (float): Localization radius.
        extra (Dict[str, ClaimSection], optional): Further sections, e.g. barrier comparisons.

    Returns:
        DiagnosticsReport: Sections and the constants C1, delta0, C0, corner coefficient
        and weighted-profile sup.

    Raises:
        HypothesisViolation: If mu = 0.
    """
    sections = check_symmetry_monotonicity(result, params, grid)
    sections["ut_bound"] = time_derivative_bound(result, u0, grid, params)
    names = ("bernstein", "localization", "J_sign", "corner", "weighted_profile")
    if result.blew_up:
        sections["bernstein"] = bernstein_section(result)
        sections["localization"] = gbu_localization(result, grid, rho)
        sections["J_sign"] = j_sign_section(result, jp, grid, jp.k)
        sections["corner"] = corner_section(result, jp, grid)
        sections["weighted_profile"] = weighted_profile_section(result, jp, grid)
    else:
        for name in names:
            sections[name] = _inconclusive(name, f"run ended with {result.status.value}")
    sections.update(extra or {})

    constants = {
        "C1": sections["ut_bound"].values["C1"],
        "delta0": 0.5 * params.mu,
    }
    if result.blew_up:
        constants["C0_grad"] = sections["bernstein"].values.get("C0_grad", float("nan"))
        constants["C0_u"] = sections["bernstein"].values.get("C0_u", float("nan"))
        constants["corner_coefficient"] = sections["corner"].values["corner_coefficient"]
        constants["weighted_profile_sup"] = sections["weighted_profile"].values["sup_final"]
    report = DiagnosticsReport(sections=sections, constants=constants)
    if report.passed:
        logger.info("all diagnostics passed")
    else:
        logger.warning(f"diagnostics not passed: {report.failing()}")
    return report
