from itertools import product
from typing import List, Optional, Tuple
import logging

import numpy as np

from barriers.service import build_global_barrier, comparison_sections, solve_V, torsion_series_max
from diagnostics.schemas import DiagnosticsReport
from diagnostics.service import diagnose
from evolution.service import run
from grid.schemas import DomainSpec, Field
from grid.service import build_grid
from helpers.exceptions import CalibrationError
from initial_data.service import build_initial_data, validate_initial_data
from lab.config import canonical_document, parse_document, with_updates
from lab.schemas import (
    CalibrationResult,
    CalibrationStep,
    EpsMonotonicity,
    RunSpec,
    SelfTestCheck,
    SimulationOutcome,
)
from operators.analytic import RADIAL, QuadraticField, halving_grids, observed_order, pointwise_errors
from operators.service import rhs
from scaling.service import pulled_back_grid, rescale_field, residual_factor, validate_params

logger = logging.getLogger(__name__)


def simulate(spec: RunSpec, monitor_j: bool = True) -> SimulationOutcome:
    """
    Build the grid and the well-prepared initial data, then integrate.

    Args:
        spec (RunSpec): Validated run configuration.
        monitor_j (bool, optional): Track max J per step. Calibration runs skip it.

    Returns:
        SimulationOutcome: Grid, parameters, initial data with its validation report, and the run.
    """
    params = validate_params(spec.pde.p, spec.pde.q, spec.pde.mu)
    grid = build_grid(spec.domain, spec.grid.nx, spec.grid.ny)
    u0 = build_initial_data(spec.initial_data, grid, params.exponents, params.mu)
    validation = validate_initial_data(u0, spec.initial_data, grid, params.exponents, params.mu)
    if not validation.passed:
        logger.warning(f"initial data are not well prepared: {validation.failures()}")
    jp = spec.j_params if params.nondegenerate and monitor_j else None
    result = run(u0, grid, params, spec.solver, jp)
    return SimulationOutcome(grid=grid, params=params, u0=u0, validation=validation, result=result)


def diagnose_outcome(spec: RunSpec, outcome: SimulationOutcome, with_barriers: bool = True) -> DiagnosticsReport:
    """Run every claim check, with the barrier comparisons when ``with_barriers`` is set."""
    extra = {}
    if with_barriers:
        bundle = build_global_barrier(
            outcome.grid, outcome.params, spec.domain.rho, spec.barriers.method, spec.barriers.eps_fraction
        )
        extra = comparison_sections(outcome.result.snapshots, outcome.grid, bundle, spec.nondeg_params)
    return diagnose(
        outcome.result, outcome.u0, outcome.grid, outcome.params, spec.j_params, spec.domain.rho, extra
    )


def _with_amplitude(spec: RunSpec, amplitude: float, t_end: Optional[float]) -> RunSpec:
    updates = {"initial_data": {"amplitude": amplitude}}
    if t_end is not None:
        updates["solver"] = {"t_end": t_end}
    return with_updates(spec, updates)


def calibrate_blowup_amplitude(spec: RunSpec) -> CalibrationResult:
    """
    Bisect the bump amplitude between a run reaching t_end and one blowing up.

    Args:
        spec (RunSpec): Template spec; ``[calibration]`` holds the bracket, the target
            relative width and the run cap.

    Returns:
        CalibrationResult: Final bracket and the history of every run.

    Raises:
        CalibrationError: If a_hi does not blow up, a_lo already does, or the run cap is hit.
    """
    section = spec.calibration
    history: List[CalibrationStep] = []

    def blows_up(amplitude: float) -> bool:
        outcome = simulate(_with_amplitude(spec, amplitude, section.t_end), monitor_j=False)
        history.append(
            CalibrationStep(amplitude=amplitude, status=outcome.result.status, t_final=outcome.result.t_final)
        )
        logger.info(f"calibration run {len(history)}: A={amplitude:.6g} -> {outcome.result.status.value}")
        return outcome.result.blew_up

    lo, hi = section.a_lo, section.a_hi
    if not blows_up(hi):
        raise CalibrationError(f"a_hi={hi} does not blow up before t_end; widen the bracket")
    if blows_up(lo):
        raise CalibrationError(f"a_lo={lo} already blows up; lower the bracket")
    while (hi - lo) / hi > section.rel_width:
        if len(history) >= section.max_runs:
            raise CalibrationError(
                f"bracket ({lo:.6g}, {hi:.6g}) still wider than {section.rel_width} after {len(history)} runs"
            )
        mid = 0.5 * (lo + hi)
        if blows_up(mid):
            hi = mid
        else:
            lo = mid
    return CalibrationResult(a_lo=lo, a_hi=hi, eps=spec.initial_data.eps, runs=len(history), history=history)


def eps_variants(spec: RunSpec) -> List[RunSpec]:
    """One spec per eps of ``calibration.eps_sweep``; the amplitude is the prefactor of eps^kappa and stays fixed."""
    return [with_updates(spec, {"initial_data": {"eps": eps}}) for eps in spec.calibration.eps_sweep]


def eps_monotonicity(results: List[CalibrationResult]) -> EpsMonotonicity:
    ordered = sorted(results, key=lambda r: r.eps)
    thresholds = {f"{r.eps:g}": r.threshold for r in ordered}
    values = [r.threshold for r in ordered]
    # bracket resolution is the tolerance
    slack = [max(r.a_hi - r.a_lo, 0.0) for r in ordered]
    non_increasing = all(values[n + 1] <= values[n] + slack[n] + slack[n + 1] for n in range(len(values) - 1))
    return EpsMonotonicity(thresholds=thresholds, non_increasing=non_increasing)


def expand_sweep(spec: RunSpec) -> List[Tuple[str, RunSpec]]:
    """
    Cartesian product of the ``[sweep]`` lists, each run revalidated.

    Returns:
        List[Tuple[str, RunSpec]]: (run name, spec) in a deterministic order; a spec with
        no sweep lists expands to itself under the name ``base``.
    """
    sweep = spec.sweep
    axes = [
        ("mu", [("pde", "mu", v) for v in sweep.mu]),
        ("eps", [("initial_data", "eps", v) for v in sweep.eps]),
        ("A", [("initial_data", "amplitude", v) for v in sweep.amplitude]),
        ("k", [("j_functional", "k", v) for v in sweep.k]),
        ("grid", [("grid", None, v) for v in sweep.grid]),
    ]
    axes = [(label, values) for label, values in axes if values]
    if not axes:
        return [("base", spec)]

    runs = []
    for combo in product(*(values for _, values in axes)):
        document = canonical_document(spec)
        document["sweep"] = {}
        parts = []
        for (label, _), (section, key, value) in zip(axes, combo):
            if key is None:
                document["grid"] = {"nx": value[0], "ny": value[1]}
                parts.append(f"{label}={value[0]}x{value[1]}")
            else:
                document[section][key] = value
                parts.append(f"{label}={value:g}")
        runs.append(("_".join(parts), parse_document(document)))
    return runs


def operator_order_checks() -> List[SelfTestCheck]:
    """Observed orders of Δ_p and the central |∇u|^q on (x^2+y^2)/2 at (0.6, 0.8)."""
    grids = halving_grids(DomainSpec(), 31, 26, 4)
    checks = []
    errors = pointwise_errors(RADIAL, grids, (0.6, 0.8), 3.0, 5.0, "p_laplacian")
    order = float(np.min(observed_order(errors)))
    checks.append(SelfTestCheck(name="p_laplacian_order", value=order, threshold=1.8, passed=order >= 1.8))
    errors = pointwise_errors(RADIAL, grids, (0.6, 0.8), 3.0, 5.0, "hamiltonian")
    worst = float(np.max(errors))
    checks.append(
        SelfTestCheck(name="hamiltonian_exact_on_quadratics", value=worst, threshold=1e-10, passed=worst <= 1e-10)
    )
    return checks


def torsion_check(n: int = 101) -> SelfTestCheck:
    """Unit-square torsion maximum from the elliptic solver (p = 2, zero data) against the series."""
    spec = DomainSpec(half_width=0.5, height=1.0, L1=0.4, L2=0.4, rho=0.1, x1=0.2, y1=0.2)
    grid = build_grid(spec, n, n)
    V = solve_V(grid, 2.0, spec.rho, torsion_only=True).V
    defect = abs(float(np.max(V.values)) - torsion_series_max())
    return SelfTestCheck(name="torsion_maximum", value=defect, threshold=1e-3, passed=defect <= 1e-3)


def scaling_check(eps: float, p: float = 3.0, q: float = 5.0) -> SelfTestCheck:
    """
    Discrete equivariance of the residual under the scaling group.

    The rescaled field sampled on the default grid and the reference field sampled on the
    pulled-back grid share the same node layout, so their discrete right-hand sides differ
    by exactly eps^(-q/(q-p+1)) up to rounding.
    """
    params = validate_params(p, q, 0.1)
    exps = params.exponents
    field = QuadraticField(a2=1.0, b11=0.5, b12=0.1, b22=0.3)
    grid = build_grid(DomainSpec(), 31, 51)
    xx, yy = grid.mesh
    scaled = Field(values=rescale_field(field, xx, yy, eps, exps))
    reference_grid = pulled_back_grid(grid, eps)
    X, Y = xx / eps, (yy - eps) / eps
    reference = Field(values=field(X, Y))
    lhs = rhs(scaled, grid, params).values[1:-1, 1:-1]
    rhs_ref = residual_factor(eps, exps) * rhs(reference, reference_grid, params).values[1:-1, 1:-1]
    defect = float(np.max(np.abs(lhs - rhs_ref)) / np.max(np.abs(rhs_ref)))
    name = f"scaling_equivariance_eps_{eps:g}"
    return SelfTestCheck(name=name, value=defect, threshold=1e-10, passed=defect <= 1e-10)


def selftest() -> List[SelfTestCheck]:
    checks = operator_order_checks()
    checks.append(torsion_check())
    checks.extend(scaling_check(eps) for eps in (0.5, 0.25))
    failing = [c.name for c in checks if not c.passed]
    if failing:
        logger.error(f"self-test failures: {failing}")
    return checks
