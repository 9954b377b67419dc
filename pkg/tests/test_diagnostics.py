import numpy as np
import pytest
from pydantic import ValidationError

from diagnostics.j_functional import (
    corner_check,
    evaluate_J,
    j_bottom_continuity,
    weight_argmax,
    weighted_profile,
)
from diagnostics.profiles import bernstein_monitor, concentration_width
from diagnostics.schemas import ClaimStatus, JParams
from diagnostics.service import (
    bernstein_section,
    check_symmetry_monotonicity,
    diagnose,
    gbu_localization,
    j_sign_section,
    time_derivative_bound,
)
from evolution.schemas import RunResult, RunStatus
from grid.schemas import Field
from grid.service import boundary_distance
from helpers.exceptions import DiagnosticError, HypothesisViolation
from initial_data.service import build_initial_data
from operators.schemas import HamiltonianScheme
from scaling.service import validate_params


@pytest.fixture
def jp():
    return JParams(p=3.0, q=5.0)


def _fake_blowup(snapshots):
    return RunResult(
        status=RunStatus.GRADIENT_BLOW_UP,
        t_final=snapshots[-1].time,
        steps=0,
        grad_max=1.0,
        initial_max_grad=0.1,
        hamiltonian_scheme=HamiltonianScheme.CENTRAL,
        snapshots=snapshots,
        series=[],
    )


def test_gamma_is_derived(jp):
    assert jp.gamma == pytest.approx(0.42)
    assert jp.with_k(3.0).gamma == jp.gamma


@pytest.mark.parametrize("alpha,sigma", [(1.0, 0.08), (3.5, 0.08), (1.5, 0.0), (1.5, 0.2)])
def test_j_params_ranges(alpha, sigma):
    with pytest.raises(ValidationError):
        JParams(p=3.0, q=5.0, alpha=alpha, sigma=sigma)


def test_J_of_boundary_data(grid, params, linear_field, jp):
    J = evaluate_J(linear_field, jp, grid)
    assert np.all(J.values[0, :] == 0.0)
    assert np.all(J.values >= 0.0)
    x, y = J.witness
    assert x == pytest.approx(0.7)
    assert y == pytest.approx(0.45)
    expected = 0.7 * 0.45 ** (-jp.gamma) * (params.mu * 0.45) ** jp.alpha
    assert J.max_value == pytest.approx(expected)


def test_weight_argmax_ignores_k(grid, small_bump, exps, params, jp):
    u0 = build_initial_data(small_bump, grid, exps, params.mu)
    assert weight_argmax(u0, jp, grid) == weight_argmax(u0, jp.with_k(7.0), grid)


def test_corner_check_on_separated_profile(grid):
    xx, yy = grid.mesh
    value, (x, y) = corner_check(Field(values=-0.5 * xx**2 * yy), 0.75, 0.5, grid)
    assert value == pytest.approx(1.0)
    assert 0.0 < x < 0.75 and 0.0 < y < 0.5


def test_weighted_profile_grows_with_region(grid, linear_field, jp):
    wide = weighted_profile(linear_field, jp, grid)
    narrow = weighted_profile(linear_field, jp.model_copy(update={"x1": 0.5}), grid)
    assert wide > narrow > 0.0


def test_bottom_row_weight_within_bound(grid, linear_field, jp):
    weight, bound = j_bottom_continuity(linear_field, jp, grid)
    assert weight <= bound * (1.0 + 1e-12)


def test_bernstein_monitor(grid, exps, params, linear_field):
    delta = boundary_distance(grid)
    assert bernstein_monitor(Field(values=np.zeros(grid.shape)), delta, exps, grid) == (0.0, 0.0)
    xx, yy = grid.mesh
    u = Field(values=np.exp(-xx) * yy)
    direct = bernstein_monitor(u, delta, exps, grid)
    mirrored = bernstein_monitor(u.mirror(), delta, exps, grid)
    assert direct == pytest.approx(mirrored, rel=1e-12)
    m_grad, m_u = bernstein_monitor(linear_field, delta, exps, grid)
    assert m_grad > 0.0 and m_u > 0.0


def test_concentration_width():
    x = np.linspace(-1.0, 1.0, 5)
    assert concentration_width(np.array([0.0, 0.2, 1.0, 0.2, 0.0]), x) == pytest.approx(0.0)
    assert concentration_width(np.array([0.0, 0.6, 1.0, 0.6, 0.0]), x) == pytest.approx(1.0)
    assert concentration_width(np.zeros(5), x) == 0.0


def test_symmetry_and_monotonicity_hold(linear_run, params, grid):
    sections = check_symmetry_monotonicity(linear_run, params, grid)
    assert set(sections) == {"don3", "don4", "don1"}
    assert all(s.passed for s in sections.values()), sections
    assert sections["don1"].values["delta0"] == pytest.approx(0.05)
    assert "band_max_ux" in sections["don4"].values


def test_degenerate_slope_rejected(linear_run, grid):
    with pytest.raises(HypothesisViolation):
        check_symmetry_monotonicity(linear_run, validate_params(3.0, 5.0, 0.0), grid)


def test_time_derivative_bound(linear_run, linear_field, grid, params):
    section = time_derivative_bound(linear_run, linear_field, grid, params)
    assert section.passed
    assert section.values["C1"] == pytest.approx(params.mu**params.q, rel=1e-6)


def test_bernstein_needs_growth(linear_run):
    assert bernstein_section(linear_run).status is ClaimStatus.INCONCLUSIVE


def test_k_search_on_boundary_data(linear_run, jp, grid):
    section = j_sign_section(linear_run, jp, grid)
    assert section.status is ClaimStatus.PASS
    assert section.values["max_J"] <= 1e-6
    assert section.values["k"] < 1e-3
    assert set(section.values["window_sensitivity"]) == {"0.4", "0.5", "0.6"}
    assert section.series["k"][0] == 1.0


def test_k_search_inconclusive_for_increasing_profile(grid, params, jp):
    xx, yy = grid.mesh
    values = params.mu * yy + 0.01 * xx * yy
    result = _fake_blowup([Field(values=values, time=0.0), Field(values=values, time=1.0)])
    section = j_sign_section(result, jp, grid)
    assert section.status is ClaimStatus.INCONCLUSIVE
    assert section.values["k"] < 1e-5


def test_localization_needs_blowup(linear_run, grid):
    with pytest.raises(DiagnosticError):
        gbu_localization(linear_run, grid, 0.5)


def test_diagnose_without_blowup(linear_run, linear_field, grid, params, jp):
    report = diagnose(linear_run, linear_field, grid, params, jp, rho=0.5)
    for name in ("bernstein", "localization", "J_sign", "corner", "weighted_profile"):
        assert report.sections[name].status is ClaimStatus.INCONCLUSIVE
    assert report.sections["ut_bound"].passed
    assert not report.passed
    assert report.constants["delta0"] == pytest.approx(0.05)
    assert "C0_grad" not in report.constants
