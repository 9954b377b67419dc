from pathlib import Path
from typing import Optional
import logging

import click

from helpers.cli import config_option, handles_lab_errors, out_option, resolve_out_dir
from lab.config import apply_overrides, parse_config
from lab.outputs import emit_outputs, prepare_dir, write_json
from lab.service import (
    calibrate_blowup_amplitude,
    diagnose_outcome,
    eps_monotonicity,
    eps_variants,
    selftest,
    simulate,
)
from lab.tasks import calibrate_many, run_sweep

logger = logging.getLogger(__name__)

grad_max_option = click.option("--grad-max", type=float, default=None, help="Blow-up threshold on max|grad u|.")
t_end_option = click.option("--t-end", type=float, default=None, help="Time horizon.")
workers_option = click.option("--workers", type=int, default=None, help="Worker processes.")


def _load(config_path: Path, grad_max: Optional[float], t_end: Optional[float]):
    return apply_overrides(parse_config(config_path), grad_max, t_end)


@click.command("simulate")
@config_option
@out_option
@grad_max_option
@t_end_option
@handles_lab_errors
def simulate_command(config_path: Path, out_dir: Optional[Path], grad_max: Optional[float], t_end: Optional[float]):
    """Integrate one run and write its artifacts (diagnostics included when mu > 0)."""
    spec = _load(config_path, grad_max, t_end)
    outcome = simulate(spec)
    report = diagnose_outcome(spec, outcome, with_barriers=False) if outcome.params.nondegenerate else None
    out_dir = resolve_out_dir(out_dir, spec.output.dir, "simulate")
    emit_outputs(spec, outcome, report, out_dir)
    result = outcome.result
    click.echo(f"{result.status.value} at t={result.t_final:.6g} after {result.steps} steps -> {out_dir}")


@click.command("diagnose")
@config_option
@out_option
@grad_max_option
@t_end_option
@click.option("--no-barriers", is_flag=True, help="Skip the barrier comparison sections.")
@handles_lab_errors
def diagnose_command(
    config_path: Path, out_dir: Optional[Path], grad_max: Optional[float], t_end: Optional[float], no_barriers: bool
):
    """Run (or replay from a manifest) and check every claim; exit 1 unless all pass."""
    spec = _load(config_path, grad_max, t_end)
    outcome = simulate(spec)
    report = diagnose_outcome(spec, outcome, with_barriers=not no_barriers)
    out_dir = resolve_out_dir(out_dir, spec.output.dir, "diagnose")
    emit_outputs(spec, outcome, report, out_dir)
    for name, section in report.sections.items():
        click.echo(f"{name:18s} {section.status.value}")
    if not report.passed:
        raise click.exceptions.Exit(1)


@click.command("calibrate")
@config_option
@out_option
@workers_option
@click.option("--eps-sweep", is_flag=True, help="Also calibrate every eps of [calibration].eps_sweep.")
@handles_lab_errors
def calibrate_command(config_path: Path, out_dir: Optional[Path], workers: Optional[int], eps_sweep: bool):
    """Bisect the blow-up amplitude threshold A*."""
    spec = parse_config(config_path)
    out_dir = prepare_dir(resolve_out_dir(out_dir, spec.output.dir, "calibrate"))
    result = calibrate_blowup_amplitude(spec)
    payload = {"calibration": result, "threshold": result.threshold, "relative_width": result.relative_width}
    click.echo(f"A* in ({result.a_lo:.6g}, {result.a_hi:.6g}] after {result.runs} runs")
    failed = False
    if eps_sweep:
        monotonicity = eps_monotonicity(calibrate_many(eps_variants(spec), workers))
        payload["eps_monotonicity"] = monotonicity
        failed = not monotonicity.non_increasing
        click.echo(f"A*(eps) {monotonicity.thresholds} non-increasing: {monotonicity.non_increasing}")
    write_json(out_dir / "calibration.json", payload)
    if failed:
        raise click.exceptions.Exit(1)


@click.command("sweep")
@config_option
@out_option
@workers_option
@handles_lab_errors
def sweep_command(config_path: Path, out_dir: Optional[Path], workers: Optional[int]):
    """Run the cartesian product of the [sweep] lists concurrently."""
    spec = parse_config(config_path)
    rows = run_sweep(spec, resolve_out_dir(out_dir, spec.output.dir, "sweep"), workers)
    for row in rows:
        click.echo(f"{row.name}: {row.status}")
    if any(row.status == "error" or row.passed is False for row in rows):
        raise click.exceptions.Exit(1)


@click.command("selftest")
@handles_lab_errors
def selftest_command():
    """Operator convergence, torsion oracle and scaling equivariance."""
    checks = selftest()
    for check in checks:
        mark = "ok" if check.passed else "FAIL"
        click.echo(f"{mark:4s} {check.name}: {check.value:.3e} (threshold {check.threshold:g})")
    if not all(check.passed for check in checks):
        raise click.exceptions.Exit(1)
