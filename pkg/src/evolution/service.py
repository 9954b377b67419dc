from typing import Optional, Tuple
import logging
import math

import numpy as np

from diagnostics.schemas import JParams
from evolution.monitors import monitor_row
from evolution.schemas import RunResult, RunStatus, SolverConfig
from grid.schemas import Field, Grid
from grid.service import boundary_distance
from helpers.exceptions import ConstraintViolation, StepDiverged
from operators.service import gradient, rhs
from scaling.schemas import PdeParams

logger = logging.getLogger(__name__)


def cfl_bounds(u: Field, grid: Grid, params: PdeParams, max_grad: Optional[float] = None) -> Tuple[float, float]:
    """
    Diffusive and advective step bounds before the safety factor.

    diffusive = min(hx, hy)^2 / (4 (p-1) G^(p-2)), advective = min(hx, hy) / (q G^(q-1)),
    G = max |∇u|. Both are infinite for a flat field.
    """
    G = float(np.max(gradient(u, grid).norm())) if max_grad is None else max_grad
    h = min(grid.hx, grid.hy)
    if G <= 0.0:
        return math.inf, math.inf
    diffusive = h * h / (4.0 * (params.p - 1.0) * G ** (params.p - 2.0))
    advective = h / (params.q * G ** (params.q - 1.0))
    return diffusive, advective


def stable_dt(
    u: Field, grid: Grid, params: PdeParams, cfg: SolverConfig, max_grad: Optional[float] = None
) -> float:
    return cfg.cfl_safety * min(cfl_bounds(u, grid, params, max_grad))


def _advance(u: Field, ut: Field, dt: float, grid: Grid, params: PdeParams) -> Field:
    values = u.values + dt * ut.values
    boundary = grid.boundary.any
    values[boundary] = grid.boundary_values(params.mu)[boundary]
    if not np.all(np.isfinite(values)):
        raise StepDiverged(f"non-finite values after step at t={u.time}, dt={dt}", last_good=u)
    return Field(values=values, time=u.time + dt)


def step(u: Field, dt: float, grid: Grid, params: PdeParams, cfg: SolverConfig) -> Field:
    """
    One forward Euler step: u + dt*rhs(u) on interior nodes, mu*y held on the boundary.

    Args:
        u (Field): Current state.
        dt (float): Step, at most ``stable_dt``.
        grid (Grid): Owning grid.
        params (PdeParams): Exponents and boundary slope.
        cfg (SolverConfig): Supplies the Hamiltonian scheme and regularization.

    Returns:
        Field: The advanced state with time u.time + dt.

    Raises:
        StepDiverged: If NaN or Inf appear; ``last_good`` is ``u``.
    """
    ut = rhs(u, grid, params, cfg.hamiltonian_scheme, cfg.eta_reg)
    return _advance(u, ut, dt, grid, params)


def resolve_grad_max(cfg: SolverConfig, initial_max_grad: float) -> float:
    if cfg.grad_max is None:
        if not initial_max_grad > 0.0:
            raise ConstraintViolation(
                "solver.grad_max", "flat initial data need an explicit blow-up threshold"
            )
        return cfg.grad_max_factor * initial_max_grad
    if not cfg.grad_max > initial_max_grad:
        raise ConstraintViolation(
            "solver.grad_max",
            f"{cfg.grad_max} must exceed the initial max gradient {initial_max_grad}",
        )
    return cfg.grad_max


def check_step_floor(u: Field, grid: Grid, params: PdeParams, cfg: SolverConfig, grad_max: float) -> float:
    """
    Stable step at max|∇u| = grad_max; the threshold must stay reachable above dt_min.

    Raises:
        ConstraintViolation: If that step is below ``dt_min``, so the run could only end in DtUnderflow.
    """
    dt = stable_dt(u, grid, params, cfg, grad_max)
    if dt < cfg.dt_min:
        raise ConstraintViolation(
            "solver.dt_min",
            f"stable step {dt:.3e} at the blow-up threshold {grad_max:.4g} is below dt_min={cfg.dt_min:.3e}; "
            "lower dt_min or grad_max",
        )
    return dt


def _symmetrize(u: Field) -> Field:
    return Field(values=0.5 * (u.values + u.values[:, ::-1]), time=u.time)


def run(
    u0: Field,
    grid: Grid,
    params: PdeParams,
    cfg: SolverConfig,
    jp: Optional[JParams] = None,
) -> RunResult:
    """
    Integrate until t_end, gradient blow-up (max|∇u| >= grad_max) or step underflow.

    Every accepted step appends a monitor row for the state it produced. Snapshots
    are taken at the initial time, every ``snapshot_every``, whenever max|∇u| has
    grown by ``snapshot_growth`` since the previous snapshot, and at termination.

    Args:
        u0 (Field): Initial data, equal to mu*y on the boundary.
        grid (Grid): Owning grid.
        params (PdeParams): Problem parameters.
        cfg (SolverConfig): Stepping controls.
        jp (JParams, optional): When given, max J over D is monitored per step.

    Returns:
        RunResult: Status, numerical end time, snapshots and per-step monitors.

    Raises:
        StepDiverged: Propagated from ``step`` with the last good state attached.
        ConstraintViolation: If grad_max is not above the initial gradient or its stable step is below dt_min.
    """
    delta = boundary_distance(grid)
    u = u0.clone()
    initial_max_grad = float(np.max(gradient(u, grid).norm()))
    grad_max = resolve_grad_max(cfg, initial_max_grad)
    floor_dt = check_step_floor(u, grid, params, cfg, grad_max)
    logger.debug(f"blow-up threshold {grad_max:.4g}, stable step there {floor_dt:.3e}")

    snapshots = [u.clone()]
    series = []
    next_snapshot = cfg.snapshot_every
    last_snapshot_grad = initial_max_grad
    pending = None
    steps = 0

    while True:
        grad = gradient(u, grid)
        G = float(np.max(grad.norm()))
        if pending is not None:
            ut, dt, defect = pending
            series.append(monitor_row(u, grad, ut, dt, grid, params, delta, jp, defect))
            if u.time >= next_snapshot or G >= cfg.snapshot_growth * last_snapshot_grad:
                snapshots.append(u.clone())
                last_snapshot_grad = G
                while next_snapshot <= u.time:
                    next_snapshot += cfg.snapshot_every
                logger.debug(f"snapshot {len(snapshots) - 1} at t={u.time:.6g}, max|grad u|={G:.6g}")

        if G >= grad_max:
            status = RunStatus.GRADIENT_BLOW_UP
            break
        remaining = cfg.t_end - u.time
        if remaining <= cfg.dt_min:
            status = RunStatus.REACHED_T_END
            break
        if steps >= cfg.max_steps:
            logger.warning(f"max_steps={cfg.max_steps} reached at t={u.time}")
            status = RunStatus.DT_UNDERFLOW
            break
        dt = stable_dt(u, grid, params, cfg, G)
        if dt < cfg.dt_min:
            status = RunStatus.DT_UNDERFLOW
            break
        dt = min(dt, remaining)

        ut = rhs(u, grid, params, cfg.hamiltonian_scheme, cfg.eta_reg)
        try:
            new = _advance(u, ut, dt, grid, params)
        except StepDiverged:
            logger.error(f"step diverged at t={u.time}, dt={dt}")
            raise
        defect = new.symmetry_defect()
        u = _symmetrize(new) if cfg.symmetrize else new
        pending = (ut, dt, defect)
        steps += 1

    if snapshots[-1].time != u.time:
        snapshots.append(u.clone())
    logger.info(
        f"run finished: {status.value} at t={u.time:.6g} after {steps} steps "
        f"(max|grad u| {initial_max_grad:.4g} -> {G:.4g}, threshold {grad_max:.4g})"
    )
    return RunResult(
        status=status,
        t_final=u.time,
        steps=steps,
        grad_max=grad_max,
        initial_max_grad=initial_max_grad,
        hamiltonian_scheme=cfg.hamiltonian_scheme,
        snapshots=snapshots,
        series=series,
    )


def compare_runs(
    lower: Field, upper: Field, grid: Grid, params: PdeParams, cfg: SolverConfig
) -> Tuple[float, float]:
    """
    Advance two ordered initial data in lockstep and track max(lower - upper).

    Both states take the same step, the smaller of their stable steps, so the
    comparison is made at identical times. Stops at t_end or when either state
    reaches the blow-up threshold of ``lower``.

    Args:
        lower (Field): Initial data expected to stay below ``upper``.
        upper (Field): Initial data with upper >= lower nodewise.
        grid (Grid): Owning grid.
        params (PdeParams): Problem parameters.
        cfg (SolverConfig): Stepping controls; ``max_steps`` caps the pair.

    Returns:
        Tuple[float, float]: (max over steps and nodes of lower - upper, time reached).
    """
    u, v = lower.clone(), upper.clone()
    grad_max = resolve_grad_max(cfg, float(np.max(gradient(u, grid).norm())))
    check_step_floor(u, grid, params, cfg, grad_max)
    worst = float(np.max(u.values - v.values))
    for _ in range(cfg.max_steps):
        G = max(float(np.max(gradient(w, grid).norm())) for w in (u, v))
        remaining = cfg.t_end - u.time
        if G >= grad_max or remaining <= cfg.dt_min:
            break
        dt = min(stable_dt(u, grid, params, cfg), stable_dt(v, grid, params, cfg), remaining)
        if dt < cfg.dt_min:
            break
        u, v = step(u, dt, grid, params, cfg), step(v, dt, grid, params, cfg)
        if cfg.symmetrize:
            u, v = _symmetrize(u), _symmetrize(v)
        worst = max(worst, float(np.max(u.values - v.values)))
    logger.info(f"lockstep comparison to t={u.time:.6g}: max(lower - upper) = {worst:.3e}")
    return worst, u.time
