from functools import cached_property

from pydantic import Field, model_validator

from helpers.models import FrozenModel


class ScalingExponents(FrozenModel):
    """Exponents of the scaling group of u_t = Δ_p u + |∇u|^q.

    Attributes:
        kappa (float): Amplitude exponent κ = (q-p)/(q-p+1).
        beta (float): Gradient profile exponent β = 1/(q-p+1).
        time_exp (float): Time exponent θ = (2q-p)/(q-p+1).
        sigma_max (float): Upper bound 1/(2(q-p+1)) for the weighted-profile σ.
        residual_exp (float): κ - θ = -q/(q-p+1), the power of ε multiplying residuals.
    """

    kappa: float
    beta: float
    time_exp: float
    sigma_max: float
    residual_exp: float


def compute_exponents(p: float, q: float) -> ScalingExponents:
    gap = q - p + 1.0
    return ScalingExponents(
        kappa=(q - p) / gap,
        beta=1.0 / gap,
        time_exp=(2.0 * q - p) / gap,
        sigma_max=1.0 / (2.0 * gap),
        residual_exp=-q / gap,
    )


class PdeParams(FrozenModel):
    """The triple (p, q, mu) of the boundary gradient blow-up problem.

    Boundary data are u = mu*y. mu = 0 is accepted (existence holds) but the record is
    then degenerate and diagnostics that need a positive slope refuse it.
    """

    p: float = Field(gt=2.0)
    q: float
    mu: float = Field(ge=0.0)

    @model_validator(mode="after")
    def check_hypotheses(self) -> "PdeParams":
        if not self.q > self.p:
            raise ValueError(f"q={self.q} must exceed p={self.p} (q > p > 2)")
        # computed once here and carried with the record
        _ = self.exponents
        return self

    @cached_property
    def exponents(self) -> ScalingExponents:
        return compute_exponents(self.p, self.q)

    @property
    def nondegenerate(self) -> bool:
        return self.mu > 0.0
