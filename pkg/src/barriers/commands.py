from pathlib import Path
from typing import Optional
import logging

import click

from barriers.nondegenerate import map_validity_region, verify_nondeg_barrier
from barriers.service import build_global_barrier, rho_sweep
from grid.service import build_grid
from helpers.cli import config_option, handles_lab_errors, out_option, resolve_out_dir
from lab.config import parse_config
from lab.outputs import prepare_dir, write_json
from scaling.service import validate_params

logger = logging.getLogger(__name__)


@click.command("verify-barriers")
@config_option
@out_option
@click.option("--samples", type=int, default=None, help="Override the nondegeneracy sample count.")
@click.option("--no-map", is_flag=True, help="Skip the (eps, eta) validity map.")
@handles_lab_errors
def verify_barriers_command(config_path: Path, out_dir: Optional[Path], samples: Optional[int], no_map: bool):
    """Build and verify the global and nondegeneracy barriers; exit 1 if either fails."""
    spec = parse_config(config_path)
    params = validate_params(spec.pde.p, spec.pde.q, spec.pde.mu)
    grid = build_grid(spec.domain, spec.grid.nx, spec.grid.ny)
    section = spec.barriers

    bundle = build_global_barrier(grid, params, spec.domain.rho, section.method, section.eps_fraction)
    rhos = rho_sweep(grid, params, section.rho_sweep, section.method) if section.rho_sweep else []

    bp = spec.nondeg_params
    nondeg = verify_nondeg_barrier(bp, params, samples or section.nondeg.samples, spec.output.seed)
    region = None
    if not no_map:
        region = map_validity_region(
            bp, params, section.nondeg.eps_grid, section.nondeg.eta_grid, section.nondeg.map_samples, spec.output.seed
        )

    report = {
        "global": {
            "mu0_found": bundle.mu0_found,
            "mu0_closed_form": bundle.mu0_closed_form,
            "eps_V": bundle.eps_V,
            "eps_halvings": bundle.eps_halvings,
            "min_residual": bundle.residual_report.min_residual,
            "witness_node": bundle.residual_report.witness_node,
            "samples": bundle.residual_report.samples,
            "properties": bundle.properties,
            "rho_sweep": rhos,
        },
        "nondegeneracy": {
            "params": bp,
            "eta_limit": bp.eta_limit,
            "min_residual": nondeg.min_residual,
            "witness_point": nondeg.witness_point,
            "samples": nondeg.samples,
        },
    }
    if region is not None:
        report["nondegeneracy"]["region"] = {
            "eps_values": region.eps_values,
            "eta_values": region.eta_values,
            "min_residual": region.min_residual,
            "valid_cells": region.valid_cells(),
        }
    out_dir = prepare_dir(resolve_out_dir(out_dir, spec.output.dir, "barriers"))
    write_json(out_dir / "barrier_report.json", report)

    ok = bundle.properties_hold and (bundle.mu0_found or 0.0) > 0.0 and nondeg.nonnegative
    click.echo(
        f"mu0_found={bundle.mu0_found:.6g} eps_V={bundle.eps_V:.4g} "
        f"nondeg min residual={nondeg.min_residual:.3e} -> {'ok' if ok else 'FAIL'}"
    )
    if not ok:
        raise click.exceptions.Exit(1)
