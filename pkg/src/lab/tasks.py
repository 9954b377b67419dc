from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional
import logging

from helpers.exceptions import LabError
from lab.config import parse_document
from lab.outputs import emit_outputs, prepare_dir, write_sweep_index
from lab.schemas import CalibrationResult, RunSpec, SweepRow
from lab.service import calibrate_blowup_amplitude, diagnose_outcome, expand_sweep, simulate
from settings import settings

logger = logging.getLogger(__name__)


def run_task(name: str, document: Dict[str, Any], out_dir: str, with_barriers: bool = False) -> SweepRow:
    """
    Simulate, diagnose and write one run; worker entry point of a sweep.

    Errors raised by the lab are caught and reported in the row so that one failing
    run does not stop the sweep.
    """
    try:
        spec = parse_document(document)
        outcome = simulate(spec)
        report = diagnose_outcome(spec, outcome, with_barriers) if outcome.params.nondegenerate else None
        emit_outputs(spec, outcome, report, Path(out_dir))
    except LabError as e:
        logger.error(f"sweep run {name} failed: {e.message}")
        return SweepRow(name=name, status="error", error=e.message)
    result = outcome.result
    return SweepRow(
        name=name,
        status=result.status.value,
        t_final=result.t_final,
        steps=result.steps,
        passed=None if report is None else report.passed,
        failing=[] if report is None else report.failing(),
    )


def run_sweep(spec: RunSpec, out_dir: Path, workers: Optional[int] = None) -> List[SweepRow]:
    """
    Expand the ``[sweep]`` lists and run every combination in a process pool.

    Each run writes into its own subdirectory; ``sweep_index.csv`` lists the runs in
    expansion order.

    Args:
        spec (RunSpec): Spec with sweep lists.
        out_dir (Path): Parent directory of the per-run directories.
        workers (int, optional): Pool size. Defaults to the NUMBER_OF_WORKERS setting.

    Returns:
        List[SweepRow]: One row per run, in expansion order.
    """
    out_dir = prepare_dir(out_dir)
    runs = expand_sweep(spec)
    workers = workers or settings.NUMBER_OF_WORKERS
    logger.info(f"sweep of {len(runs)} runs on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(run_task, name, run_spec.model_dump(mode="json"), str(out_dir / name))
            for name, run_spec in runs
        ]
        rows = [future.result() for future in futures]
    write_sweep_index(out_dir / "sweep_index.csv", rows)
    return rows


def calibrate_task(document: Dict[str, Any]) -> CalibrationResult:
    return calibrate_blowup_amplitude(parse_document(document))


def calibrate_many(specs: List[RunSpec], workers: Optional[int] = None) -> List[CalibrationResult]:
    """Independent calibrations in a process pool, results in input order."""
    workers = workers or settings.NUMBER_OF_WORKERS
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(calibrate_task, s.model_dump(mode="json")) for s in specs]
        return [future.result() for future in futures]
