import pytest
from pydantic import ValidationError

from grid.service import build_grid
from helpers.exceptions import HypothesisViolation
from scaling.schemas import PdeParams
from scaling.service import (
    exponent_identity_defects,
    pulled_back_grid,
    rescale_point,
    residual_factor,
    validate_params,
)


def test_exponents_for_default_pair(exps):
    assert exps.kappa == pytest.approx(2.0 / 3.0)
    assert exps.beta == pytest.approx(1.0 / 3.0)
    assert exps.time_exp == pytest.approx(7.0 / 3.0)
    assert exps.residual_exp == pytest.approx(-5.0 / 3.0)
    assert exps.sigma_max == pytest.approx(1.0 / 6.0)


@pytest.mark.parametrize("p,q", [(3.0, 5.0), (2.5, 3.0), (4.0, 9.5)])
def test_exponent_identities(p, q):
    defects = exponent_identity_defects(validate_params(p, q, 0.1).exponents, q)
    assert max(defects.values()) <= 1e-14


@pytest.mark.parametrize("p,q,mu", [(3.0, 3.0, 0.1), (2.0, 5.0, 0.1), (3.0, 2.5, 0.1), (3.0, 5.0, -0.1)])
def test_hypotheses_rejected(p, q, mu):
    with pytest.raises(HypothesisViolation):
        validate_params(p, q, mu)


def test_zero_slope_is_degenerate():
    params = validate_params(3.0, 5.0, 0.0)
    assert not params.nondegenerate


def test_params_round_trip():
    params = PdeParams(p=3.0, q=5.0, mu=0.1)
    assert PdeParams.model_validate(params.model_dump()) == params
    with pytest.raises(ValidationError):
        PdeParams(p=3.0, q=5.0, mu=0.1, kappa=1.0)


def test_rescale_point(exps):
    (X, Y, T), value = rescale_point(0.2, 0.3, 0.1, 2.0, 0.5, exps)
    assert (X, Y) == pytest.approx((0.4, -0.4))
    assert T == pytest.approx(0.1 / 0.5 ** (7.0 / 3.0))
    assert value == pytest.approx(2.0 * 0.5 ** (2.0 / 3.0))


@pytest.mark.parametrize("eps", [0.0, -1.0])
def test_rescale_point_needs_positive_scale(exps, eps):
    with pytest.raises(ValueError):
        rescale_point(0.1, 0.1, 0.0, 1.0, eps, exps)


def test_residual_factor(exps):
    assert residual_factor(0.25, exps) == pytest.approx(0.25 ** (-5.0 / 3.0))


def test_pulled_back_grid_spacings(domain):
    grid = build_grid(domain, 31, 51)
    pulled = pulled_back_grid(grid, 0.5)
    assert pulled.hx == grid.hx / 0.5
    assert pulled.hy == grid.hy / 0.5
    assert pulled.shape == grid.shape
