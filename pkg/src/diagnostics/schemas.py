from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field as PydanticField, model_validator

from helpers.models import FrozenModel, LabModel


class JParams(FrozenModel):
    """Parameters of J = u_x + k*x*y^(-gamma)*u^alpha on D = (0, x1) x (0, y1).

    gamma = (1 - 2*sigma)*(alpha - 1) is derived, never stored independently.
    """

    p: float
    q: float
    k: float = PydanticField(default=1.0, gt=0.0)
    alpha: float = 1.5
    sigma: float = 0.08
    x1: float = PydanticField(default=0.75, gt=0.0)
    y1: float = PydanticField(default=0.5, gt=0.0)

    @model_validator(mode="after")
    def check_exponents(self) -> "JParams":
        if not 1.0 < self.alpha < 1.0 + self.q - self.p:
            raise ValueError(f"alpha={self.alpha} must satisfy 1 < alpha < 1 + q - p = {1.0 + self.q - self.p}")
        sigma_max = 1.0 / (2.0 * (self.q - self.p + 1.0))
        if not 0.0 < self.sigma < sigma_max:
            raise ValueError(f"sigma={self.sigma} must satisfy 0 < sigma < {sigma_max}")
        return self

    @property
    def gamma(self) -> float:
        return (1.0 - 2.0 * self.sigma) * (self.alpha - 1.0)

    def with_k(self, k: float) -> "JParams":
        return self.model_copy(update={"k": k})


class JField(LabModel):
    """J sampled on the nodes of D (rows 0 <= y < y1, columns 0 < x < x1)."""

    values: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    max_value: float
    witness: Tuple[float, float]


class ClaimStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class Witness(BaseModel):
    node: Optional[Tuple[int, int]] = None
    x: Optional[float] = None
    y: Optional[float] = None
    time: Optional[float] = None
    value: Optional[float] = None


class ClaimSection(BaseModel):
    """One checked claim: status, the extremal witness and named numeric values."""

    name: str
    status: ClaimStatus
    witness: Optional[Witness] = None
    values: Dict[str, Any] = {}
    series: Dict[str, List[float]] = {}
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.status is ClaimStatus.PASS


class DiagnosticsReport(BaseModel):
    sections: Dict[str, ClaimSection]
    constants: Dict[str, float] = {}

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.sections.values())

    def failing(self) -> List[str]:
        return [name for name, s in self.sections.items() if not s.passed]
