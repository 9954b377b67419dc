import numpy as np
import pytest

from barriers.nondegenerate import (
    derivative_defects,
    map_validity_region,
    nondeg_barrier,
    nondeg_comparison,
    verify_nondeg_barrier,
)
from barriers.schemas import NondegBarrierParams, SolveMethod
from barriers.service import (
    MU_THRESHOLD,
    barrier_eps,
    barrier_field,
    boundary_profile,
    build_global_barrier,
    comparison_sections,
    golden_section_eps,
    rho_sweep,
    solve_V,
    torsion_series_max,
    verify_supersolution_static,
)
from diagnostics.schemas import ClaimStatus
from grid.schemas import Field
from grid.service import build_grid
from lab.service import torsion_check


@pytest.fixture
def bundle(grid, params):
    return build_global_barrier(grid, params, rho=0.5)


@pytest.fixture
def bp(exps):
    return NondegBarrierParams(beta=exps.beta)


def test_torsion_series():
    assert torsion_series_max() == pytest.approx(0.0736713, rel=1e-5)


def test_torsion_check_passes():
    check = torsion_check()
    assert check.passed, check.value


def test_boundary_profile(grid):
    phi = boundary_profile(grid, 0.5)
    assert phi[0, grid.center] == 1.0
    assert np.all(phi[1:, :] == 0.0)
    assert np.all(phi[0, np.abs(grid.x) >= 0.5] == 0.0)


def test_solvers_agree(grid, params):
    iterative = solve_V(grid, params.p, 0.5, SolveMethod.CG)
    direct = solve_V(grid, params.p, 0.5, SolveMethod.DIRECT)
    assert iterative.iterations > 0
    assert direct.iterations == 0
    assert iterative.relative_residual <= 1e-10
    np.testing.assert_allclose(iterative.V.values, direct.V.values, atol=1e-8)


def test_V_is_symmetric_and_positive(grid, params):
    V = solve_V(grid, params.p, 0.5).V
    assert V.symmetry_defect() == 0.0
    assert np.all(V.values[grid.boundary.interior] > 0.0)


def test_barrier_eps_bounds_vertical_slope(grid, params):
    V = solve_V(grid, params.p, 0.5).V
    eps, halvings = barrier_eps(V, grid, params.p)
    assert eps > 0.0
    assert halvings >= 0
    ubar = barrier_field(V, eps, 1.0, grid)
    assert np.all(ubar.values >= grid.mesh[1])


def test_global_barrier_properties(bundle, grid, params):
    assert bundle.properties_hold, bundle.properties
    assert set(bundle.properties) == {"proppsi1", "proppsi2", "proppsi3"}
    assert np.all(bundle.Ubar.values >= params.mu * grid.mesh[1])
    assert bundle.properties["proppsi3"].worst_value <= 0.5


def test_mu0_against_closed_form(bundle, grid, params):
    assert bundle.mu0_found > 0.0
    expected = min(bundle.mu0_closed_form, 1.0)
    # the bisection threshold sits slightly below zero, so it can only land above the closed form
    assert bundle.mu0_found >= expected - 2e-6
    ubar = barrier_field(bundle.V, bundle.eps_V, bundle.mu0_found, grid)
    assert verify_supersolution_static(ubar, grid, params).min_residual >= MU_THRESHOLD


def test_large_slope_is_not_a_supersolution(bundle, grid, params):
    ubar = barrier_field(bundle.V, bundle.eps_V, 10.0, grid)
    assert verify_supersolution_static(ubar, grid, params).min_residual < 0.0


def test_mu0_grows_with_rho(domain, params):
    finer = build_grid(domain, 61, 101)
    sweep = rho_sweep(finer, params, [0.3, 0.4, 0.5])
    assert [rho for rho, _ in sweep] == [0.3, 0.4, 0.5]
    mu0 = [value for _, value in sweep]
    assert all(m > 0.0 for m in mu0)
    # bisection tolerance of find_mu0
    assert all(later >= earlier - 1e-6 for earlier, later in zip(mu0, mu0[1:])), mu0


def test_boundary_data_are_not_a_strict_supersolution(grid, params, linear_field):
    report = verify_supersolution_static(linear_field, grid, params)
    assert report.min_residual == pytest.approx(-(params.mu**params.q), rel=1e-6)
    assert not report.nonnegative
    i, j = report.witness_node
    assert 0 < i < grid.nx - 1 and 0 < j < grid.ny - 1


def test_golden_section_stays_in_bracket(bundle, grid, params):
    eps_max, _ = barrier_eps(bundle.V, grid, params.p, max_halvings=0)
    eps, worst = golden_section_eps(bundle.V, grid, params, params.mu)
    assert 0.0 < eps <= eps_max
    assert np.isfinite(worst)


def test_comparison_not_applicable_above_barrier(bundle, grid):
    above = Field(values=bundle.Ubar.values + 1.0)
    sections = comparison_sections([above, above], grid, bundle=bundle)
    assert sections["global_barrier"].status is ClaimStatus.INCONCLUSIVE


def test_nondeg_barrier_boundary_values(bp):
    x = np.linspace(-0.2, 0.2, 5)
    assert np.all(nondeg_barrier(bp, x, 0.0, 0.5).v == 0.0)
    y = np.array([0.01, 0.1, 0.2])
    np.testing.assert_allclose(nondeg_barrier(bp, 0.1, y, bp.t0).v, bp.eps0 * y ** (1.0 - bp.beta))


def test_nondeg_derivatives_match_differences():
    bp = NondegBarrierParams(eps0=1.0, eta=0.5, r=0.5, beta=1.0 / 3.0)
    defects = derivative_defects(bp, 0.2, 0.2, 0.5)
    assert max(defects.values()) <= 1e-6, defects


def test_nondeg_residual_is_nonnegative(bp, params):
    report = verify_nondeg_barrier(bp, params, samples=100_000, seed=0)
    assert report.nonnegative, report.witness_point
    assert report.samples == 100_000
    x, y, t = report.witness_point
    assert abs(x - bp.x0) <= bp.r and 0.0 < y <= bp.d and bp.t0 <= t <= bp.T


def test_eta_limit(exps):
    bp = NondegBarrierParams(beta=exps.beta)
    assert bp.eta_limit == pytest.approx(4.0)
    assert bp.eta_admissible
    assert not bp.model_copy(update={"eta": 5.0}).eta_admissible


def test_nondeg_params_need_time_box(exps):
    with pytest.raises(ValueError):
        NondegBarrierParams(beta=exps.beta, t0=1.0, T=1.0)


def test_validity_region_map(bp, params):
    region = map_validity_region(bp, params, [0.05], [1e-3, 5.0], samples=2000)
    assert region.min_residual.shape == (1, 2)
    assert np.isnan(region.min_residual[0, 1])
    assert (0.05, 1e-3) in region.valid_cells()


def test_nondeg_comparison_applicability(grid, bp):
    zero = [Field(values=np.zeros(grid.shape), time=t) for t in (0.0, 0.5)]
    applicable, gap = nondeg_comparison(zero, grid, bp)
    assert applicable
    assert gap < 0.0
    high = [Field(values=np.ones(grid.shape), time=t) for t in (0.0, 0.5)]
    assert nondeg_comparison(high, grid, bp) == (False, None)
