from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field as PydanticField, model_validator

from grid.schemas import Field
from helpers.models import FrozenModel, LabModel
from initial_data.schemas import ConditionResult


class SolveMethod(str, Enum):
    CG = "cg"
    DIRECT = "direct"


class VSolution(LabModel):
    V: Field
    method: SolveMethod
    iterations: int
    relative_residual: float


class ResidualReport(BaseModel):
    """Minimum of a supersolution residual with the node or sample attaining it."""

    min_residual: float
    witness_node: Optional[Tuple[int, int]] = None
    witness_point: Optional[Tuple[float, ...]] = None
    samples: int = 0

    @property
    def nonnegative(self) -> bool:
        return self.min_residual >= 0.0


class BarrierBundle(LabModel):
    """Global barrier Ubar = mu*(y + eps_V*V) and its checks."""

    V: Field
    eps_V: float
    eps_halvings: int
    mu: float
    mu0_found: Optional[float] = None
    mu0_closed_form: Optional[float] = None
    Ubar: Field
    residual_report: ResidualReport
    properties: Dict[str, ConditionResult]

    @property
    def properties_hold(self) -> bool:
        return all(c.passed for c in self.properties.values())


class NondegBarrierParams(FrozenModel):
    """Parameters of v = eps0*y*W^(-beta), W = y + eta*(r^2 - (x - x0)^2)*(t - t0).

    ``T`` is the end of the time box (t0, T); the box in space is |x - x0| < r, 0 < y < d.
    """

    eps0: float = PydanticField(default=0.05, gt=0.0)
    eta: float = PydanticField(default=1e-3, gt=0.0)
    r: float = PydanticField(default=0.25, gt=0.0)
    d: float = PydanticField(default=0.25, gt=0.0)
    x0: float = 0.0
    t0: float = PydanticField(default=0.0, ge=0.0)
    T: float = PydanticField(default=1.0, gt=0.0)
    beta: float = PydanticField(gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def check_box(self) -> "NondegBarrierParams":
        if not self.T > self.t0:
            raise ValueError(f"T={self.T} must exceed t0={self.t0}")
        return self

    @property
    def eta_limit(self) -> float:
        return self.d / (self.T * self.r**2)

    @property
    def eta_admissible(self) -> bool:
        return self.eta <= self.eta_limit


class NondegRegionMap(LabModel):
    """min residual over a log-spaced (eps0, eta) grid; NaN marks eta above d/(T r^2)."""

    eps_values: np.ndarray
    eta_values: np.ndarray
    min_residual: np.ndarray
    samples: int

    def valid_cells(self) -> List[Tuple[float, float]]:
        cells = []
        for a, eps in enumerate(self.eps_values):
            for b, eta in enumerate(self.eta_values):
                value = self.min_residual[a, b]
                if np.isfinite(value) and value >= 0.0:
                    cells.append((float(eps), float(eta)))
        return cells
