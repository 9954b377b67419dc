from typing import Callable, Tuple
import logging

import numpy as np
from pydantic import ValidationError

from grid.schemas import DomainSpec, Grid
from helpers.exceptions import HypothesisViolation
from scaling.schemas import PdeParams, ScalingExponents

logger = logging.getLogger(__name__)

Point = Tuple[float, float, float]


def validate_params(p: float, q: float, mu: float) -> PdeParams:
    """
    Validate the standing hypotheses q > p > 2 and mu >= 0.

    Args:
        p (float): Diffusion exponent of the p-Laplacian.
        q (float): Exponent of the gradient source |∇u|^q.
        mu (float): Slope of the boundary data u = mu*y.

    Returns:
        PdeParams: The validated record with its scaling exponents populated.

    Raises:
        HypothesisViolation: If q <= p, p <= 2 or mu < 0.
    """
    try:
        params = PdeParams(p=p, q=q, mu=mu)
    except ValidationError as e:
        reasons = "; ".join(err["msg"] for err in e.errors())
        raise HypothesisViolation(f"(p={p}, q={q}, mu={mu}) rejected: {reasons}") from e
    if not params.nondegenerate:
        logger.warning("mu = 0 accepted; diagnostics requiring mu > 0 will refuse this run")
    return params


def scaling_exponents(params: PdeParams) -> ScalingExponents:
    return params.exponents


def rescale_point(
    x: float, y: float, t: float, value: float, eps: float, exps: ScalingExponents
) -> Tuple[Point, float]:
    """
    Map a point of the rescaled frame to the reference frame.

    The scaling group maps a solution v to v_eps(x, y, t) = eps^kappa v(x/eps, (y - eps)/eps, t/eps^theta).
    Given a point (x, y, t) of the rescaled frame, this returns the pulled-back point
    where v must be evaluated together with the eps^kappa multiple of ``value`` (the
    value of v at that pulled-back point).

    Args:
        x, y, t (float): Coordinates in the rescaled frame.
        value (float): v evaluated at the pulled-back point.
        eps (float): Scale, strictly positive.
        exps (ScalingExponents): Exponents of the equation.

    Returns:
        Tuple[Point, float]: ((X, Y, T), eps^kappa * value).

    Raises:
        ValueError: If eps <= 0.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    point = (x / eps, (y - eps) / eps, t / eps**exps.time_exp)
    return point, eps**exps.kappa * value


def rescale_field(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    xx: np.ndarray,
    yy: np.ndarray,
    eps: float,
    exps: ScalingExponents,
) -> np.ndarray:
    """
    Sample the rescaled version of a stationary analytic field on node coordinates.

    Args:
        func: Vectorized v(X, Y) in the reference frame.
        xx, yy (np.ndarray): Node coordinates of the rescaled frame.
        eps (float): Scale.
        exps (ScalingExponents): Exponents of the equation.

    Returns:
        np.ndarray: eps^kappa * v(x/eps, (y - eps)/eps) at every node.
    """
    (X, Y, _), _ = rescale_point(xx, yy, 0.0, 0.0, eps, exps)
    _, values = rescale_point(xx, yy, 0.0, func(X, Y), eps, exps)
    return values


def pulled_back_grid(grid: Grid, eps: float) -> Grid:
    """Grid of the reference frame: every length divided by eps, same node counts.

    Its spacings are hx/eps, hy/eps, so a field sampled by ``rescale_field`` on ``grid``
    and the reference field sampled on this grid differ only by a shift in y.
    """
    lengths = grid.spec.model_dump()
    spec = DomainSpec(**{key: value / eps for key, value in lengths.items()})
    return Grid(spec=spec, nx=grid.nx, ny=grid.ny)


def residual_factor(eps: float, exps: ScalingExponents) -> float:
    """Factor eps^(kappa - theta) = eps^(-q/(q-p+1)) relating residuals of v_eps and v."""
    return eps**exps.residual_exp


def exponent_identity_defects(exps: ScalingExponents, q: float) -> dict:
    return {
        "kappa_plus_beta": abs(exps.kappa + exps.beta - 1.0),
        "time_exp": abs(exps.time_exp - (exps.kappa + q * exps.beta)),
        "residual_exp": abs(exps.residual_exp - (exps.kappa - exps.time_exp)),
        "sigma_max": abs(exps.sigma_max - exps.beta / 2.0),
    }
