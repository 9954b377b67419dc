"""Desk-scale end-to-end runs on the default configuration; select with ``pytest -m slow``."""

from pathlib import Path

import numpy as np
import pytest

from barriers.nondegenerate import map_validity_region, verify_nondeg_barrier
from diagnostics.schemas import ClaimStatus
from evolution.schemas import RunStatus, SolverConfig
from evolution.service import compare_runs
from grid.service import build_grid
from initial_data.schemas import InitialDataSpec
from initial_data.service import build_initial_data
from lab.config import parse_config, with_updates
from lab.service import calibrate_blowup_amplitude, diagnose_outcome, simulate

pytestmark = pytest.mark.slow

DEFAULT_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "default.toml"


@pytest.fixture(scope="module")
def spec():
    return parse_config(DEFAULT_CONFIG)


@pytest.fixture(scope="module")
def calibration(spec):
    return calibrate_blowup_amplitude(spec)


@pytest.fixture(scope="module")
def blowup(spec, calibration):
    run_spec = with_updates(spec, {"initial_data": {"amplitude": 3.0 * calibration.threshold}})
    outcome = simulate(run_spec)
    return run_spec, outcome


@pytest.fixture(scope="module")
def report(blowup):
    run_spec, outcome = blowup
    return diagnose_outcome(run_spec, outcome)


def test_calibration_converges(calibration, spec):
    assert calibration.runs <= spec.calibration.max_runs
    assert calibration.relative_width <= spec.calibration.rel_width
    assert calibration.history[0].status is RunStatus.GRADIENT_BLOW_UP


def test_gradient_blows_up(blowup, spec):
    _, outcome = blowup
    result = outcome.result
    assert result.status is RunStatus.GRADIENT_BLOW_UP
    assert result.t_final < spec.solver.t_end
    assert result.series[-1].max_grad >= 1e3 * result.initial_max_grad


def test_a_priori_bounds(report):
    for name in ("don1", "don3", "don4", "ut_bound"):
        assert report.sections[name].passed, report.sections[name]


def test_single_point_localization(report):
    section = report.sections["localization"]
    assert section.passed, section.values
    assert all(abs(offset) <= 1 for offset in section.values["argmax_offsets"])


def test_bernstein_profile(report):
    assert report.sections["bernstein"].passed, report.sections["bernstein"].values


def test_J_sign_and_profiles(report):
    section = report.sections["J_sign"]
    assert section.status is ClaimStatus.PASS, section.message
    assert section.values["k"] > 1e-6
    assert report.sections["weighted_profile"].passed
    assert report.sections["corner"].passed


def test_barrier_comparisons(report):
    assert report.sections["global_barrier"].status is not ClaimStatus.FAIL
    assert report.sections["nondeg_comparison"].status is not ClaimStatus.FAIL


def test_larger_amplitude_blows_up_sooner(spec, calibration, blowup):
    _, outcome = blowup
    faster = simulate(with_updates(spec, {"initial_data": {"amplitude": 4.0 * calibration.threshold}}))
    assert faster.result.blew_up
    assert faster.result.t_final <= outcome.result.t_final + 1e-6


def test_ordered_data_stay_ordered(spec, calibration):
    params = spec.pde
    grid = build_grid(spec.domain, 61, 101)
    rng = np.random.default_rng(spec.output.seed)
    cfg = SolverConfig(t_end=0.2)
    for _ in range(5):
        a_lo, a_hi = np.sort(rng.uniform(0.05, 0.5, 2) * calibration.a_lo)
        lower = build_initial_data(InitialDataSpec(amplitude=float(a_lo)), grid, params.exponents, params.mu)
        upper = build_initial_data(InitialDataSpec(amplitude=float(a_hi)), grid, params.exponents, params.mu)
        assert np.all(lower.values <= upper.values)
        worst, _ = compare_runs(lower, upper, grid, params, cfg)
        assert worst <= 1e-8


def test_sub_threshold_run_respects_bounds(spec, calibration):
    outcome = simulate(
        with_updates(spec, {"initial_data": {"amplitude": 0.5 * calibration.a_lo}, "solver": {"t_end": 0.1}})
    )
    floor = outcome.grid.boundary_values(spec.pde.mu)
    ceiling = float(np.max(outcome.u0.values))
    for snap in outcome.result.snapshots:
        assert np.all(snap.values >= floor - 1e-10)
        assert np.max(snap.values) <= ceiling + 1e-8


def test_nondegeneracy_barrier_region(spec):
    bp = spec.nondeg_params
    report = verify_nondeg_barrier(bp, spec.pde, samples=1_000_000, seed=spec.output.seed)
    assert report.nonnegative, report.witness_point
    section = spec.barriers.nondeg
    region = map_validity_region(bp, spec.pde, section.eps_grid, section.eta_grid, section.map_samples)
    assert region.valid_cells()
