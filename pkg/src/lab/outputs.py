from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence
import csv
import logging
import platform

import numpy as np
import pydantic
import scipy

from diagnostics.profiles import bottom_uy
from diagnostics.schemas import DiagnosticsReport
from evolution.schemas import SERIES_COLUMNS
from grid.service import field_rows
from helpers.exceptions import OutputError
from helpers.models import utcnow
from helpers.serialization import dumps
from lab.schemas import RunSpec, SimulationOutcome
from settings import settings

logger = logging.getLogger(__name__)

# claim sections of diagnostics.json each artifact renders
RENDERS = {
    "series.csv": ["don1", "don4", "ut_bound", "bernstein"],
    "snapshot": ["don1", "don3"],
    "bottom_profile.csv": ["localization", "weighted_profile", "corner"],
    "j_max.csv": ["J_sign"],
    "sweep_index.csv": ["don1", "don3", "don4", "ut_bound", "bernstein", "localization", "J_sign", "corner"],
}


def renders(artifact: str) -> str:
    return "renders: " + ", ".join(RENDERS[artifact])


def versions() -> dict:
    return {
        "app": settings.APP_NAME,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


def prepare_dir(path: Path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(path, f"cannot create output directory: {e}") from e
    return path


def write_json(path: Path, obj: Any) -> Path:
    try:
        path.write_text(dumps(obj), encoding="utf-8")
    except OSError as e:
        raise OutputError(path, f"cannot write JSON: {e}") from e
    return path


def write_csv(path: Path, comments: Sequence[str], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """CSV with leading ``#`` comment lines naming what the table renders."""
    try:
        with path.open("w", newline="", encoding="utf-8") as f:
            for line in comments:
                f.write(f"# {line}\n")
            writer = csv.writer(f)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise OutputError(path, f"cannot write CSV: {e}") from e
    return path


def write_series(path: Path, outcome: SimulationOutcome) -> Path:
    comments = [
        "per-step monitors of u_t = Δ_p u + |∇u|^q, u = mu*y on the boundary; " + renders("series.csv")
    ]
    try:
        with path.open("w", newline="", encoding="utf-8") as f:
            for line in comments:
                f.write(f"# {line}\n")
            writer = csv.DictWriter(f, fieldnames=SERIES_COLUMNS, extrasaction="ignore")
            writer.writeheader()
            for row in outcome.result.series:
                writer.writerow(row.model_dump())
    except OSError as e:
        raise OutputError(path, f"cannot write CSV: {e}") from e
    return path


def manifest(spec: RunSpec, outcome: SimulationOutcome) -> dict:
    result = outcome.result
    return {
        "spec": spec.model_dump(mode="json"),
        "status": result.status,
        "t_final": result.t_final,
        "steps": result.steps,
        "grad_max": result.grad_max,
        "initial_max_grad": result.initial_max_grad,
        "snapshots": len(result.snapshots),
        "renders": RENDERS,
        "initial_data_checks": outcome.validation,
        "versions": versions(),
        "created_at": utcnow(),
    }


def emit_outputs(
    spec: RunSpec, outcome: SimulationOutcome, report: Optional[DiagnosticsReport], out_dir: Path
) -> List[Path]:
    """
    Write the artifacts of one run.

    Files: manifest.json, series.csv, snapshot_NNNN.csv (one per snapshot),
    diagnostics.json (when a report is given), bottom_profile.csv (bottom-edge |u_y|
    per snapshot) and j_max.csv (max J over D per step).

    Args:
        spec (RunSpec): The run configuration, stored in the manifest.
        outcome (SimulationOutcome): Completed simulation.
        report (DiagnosticsReport, optional): Claim checks of the run.
        out_dir (Path): Target directory, created if missing.

    Returns:
        List[Path]: Written files.

    Raises:
        OutputError: On any IO failure, with the offending path.
    """
    out_dir = prepare_dir(out_dir)
    grid, result = outcome.grid, outcome.result
    written = [
        write_json(out_dir / "manifest.json", manifest(spec, outcome)),
        write_series(out_dir / "series.csv", outcome),
    ]

    if spec.output.snapshot_files:
        for n, snap in enumerate(result.snapshots):
            written.append(
                write_csv(
                    out_dir / f"snapshot_{n:04d}.csv",
                    [
                        f"solution snapshot {n} at t={snap.time!r}; {renders('snapshot')}",
                        "nodes row-major by y then x",
                    ],
                    ["x", "y", "u"],
                    field_rows(snap, grid),
                )
            )

    profile_rows = []
    for n, snap in enumerate(result.snapshots):
        uy = bottom_uy(snap, grid)
        profile_rows.extend((n, snap.time, float(x), float(v)) for x, v in zip(grid.x, uy))
    written.append(
        write_csv(
            out_dir / "bottom_profile.csv",
            [
                "bottom-edge |u_y| per snapshot: concentration of the gradient blow-up at the origin; "
                + renders("bottom_profile.csv")
            ],
            ["snapshot", "t", "x", "abs_uy"],
            profile_rows,
        )
    )

    if outcome.params.nondegenerate:
        j_rows = [(row.t, row.max_J) for row in result.series]
        written.append(
            write_csv(
                out_dir / "j_max.csv",
                [
                    f"max over D of J = u_x + k*x*y^(-gamma)*u^alpha, k={spec.j_functional.k}; "
                    + renders("j_max.csv")
                ],
                ["t", "max_J"],
                j_rows,
            )
        )

    if report is not None:
        written.append(write_json(out_dir / "diagnostics.json", report))
    logger.info(f"wrote {len(written)} files to {out_dir}")
    return written


def write_sweep_index(path: Path, rows: Sequence[Any]) -> Path:
    header = ["name", "status", "t_final", "steps", "passed", "failing", "error"]
    body = [
        (r.name, r.status, r.t_final, r.steps, r.passed, ";".join(r.failing), r.error) for r in rows
    ]
    return write_csv(path, ["one row per expanded sweep run; " + renders("sweep_index.csv")], header, body)
