from functools import wraps
from pathlib import Path
from typing import Optional
import logging

import click

from helpers.exceptions import LabError
from settings import settings

logger = logging.getLogger(__name__)

config_option = click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="TOML run configuration or an emitted manifest.json.",
)
out_option = click.option(
    "--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None, help="Output directory."
)


def handles_lab_errors(func):
    """Log a LabError, print one line and exit with its exit code."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except LabError as e:
            logger.error(f"{type(e).__name__}: {e.message}")
            click.echo(f"error: {e.message}", err=True)
            raise click.exceptions.Exit(e.exit_code)

    return wrapper


def resolve_out_dir(out_dir: Optional[Path], configured: Optional[str], name: str) -> Path:
    if out_dir is not None:
        return out_dir
    if configured is not None:
        return Path(configured)
    return settings.output_path / name
