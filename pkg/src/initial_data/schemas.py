from typing import Dict, Optional, Tuple

from pydantic import BaseModel, Field as PydanticField

from helpers.models import FrozenModel


class InitialDataSpec(FrozenModel):
    """Bump family u0 = mu*y + A*eps^kappa*phi(x/eps)*psi_eps(y).

    Attributes:
        eps (float): Bump scale.
        amplitude (float): A, the free prefactor of eps^kappa.
        mu (float): Boundary slope; filled from the PDE parameters when loaded from a run spec.
        plateau (float): phi = 1 for |s| <= plateau.
        support (float): phi = 0 for |s| >= support.
        loc_c (float): Height c of the localization bound mu*(y + c*indicator).
    """

    eps: float = PydanticField(default=0.2, gt=0.0)
    amplitude: float = PydanticField(default=1.0, gt=0.0)
    mu: Optional[float] = PydanticField(default=None, ge=0.0)
    plateau: float = 1.0 / 3.0
    support: float = 2.0 / 3.0
    loc_c: float = PydanticField(default=0.05, gt=0.0)


class ConditionResult(BaseModel):
    """Outcome of one nodewise condition; a failure always carries the worst node."""

    passed: bool
    worst_value: float
    witness: Optional[Tuple[int, int]] = None
    witness_xy: Optional[Tuple[float, float]] = None
    detail: str = ""


class ValidationReport(BaseModel):
    conditions: Dict[str, ConditionResult]
    notes: Dict[str, ConditionResult] = {}

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def failures(self):
        return [name for name, c in self.conditions.items() if not c.passed]
