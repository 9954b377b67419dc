from enum import Enum
from typing import List, Optional

from pydantic import Field as PydanticField

from grid.schemas import Field
from helpers.models import FrozenModel, LabModel
from operators.schemas import HamiltonianScheme


class RunStatus(str, Enum):
    REACHED_T_END = "ReachedTEnd"
    GRADIENT_BLOW_UP = "GradientBlowUp"
    DT_UNDERFLOW = "DtUnderflow"


class SolverConfig(FrozenModel):
    """Explicit stepping controls.

    Attributes:
        cfl_safety (float): Factor in (0, 1] applied to the CFL bounds.
        dt_min (float): Steps below this end the run with DtUnderflow. The stable step
            falls like max|∇u|^(1-q), so the floor has to sit below the step at grad_max.
        grad_max (float, optional): Blow-up threshold on max|∇u|; when omitted it is
            ``grad_max_factor`` times the initial max gradient.
        grad_max_factor (float): See ``grad_max``.
        t_end (float): Horizon.
        snapshot_every (float): Time between scheduled snapshots.
        snapshot_growth (float): Extra snapshot whenever max|∇u| grew by this factor.
        hamiltonian_scheme (HamiltonianScheme): ``central`` or ``upwind``.
        eta_reg (float): Face-gradient regularization of the p-Laplacian (0 = exact).
        max_steps (int): Hard cap on accepted steps.
        symmetrize (bool): Average mirror nodes after each step.
    """

    cfl_safety: float = PydanticField(default=0.4, gt=0.0, le=1.0)
    dt_min: float = PydanticField(default=1e-30, gt=0.0)
    grad_max: Optional[float] = PydanticField(default=None, gt=0.0)
    grad_max_factor: float = PydanticField(default=1e3, gt=1.0)
    t_end: float = PydanticField(default=10.0, gt=0.0)
    snapshot_every: float = PydanticField(default=0.5, gt=0.0)
    snapshot_growth: float = PydanticField(default=2.0, gt=1.0)
    hamiltonian_scheme: HamiltonianScheme = HamiltonianScheme.CENTRAL
    eta_reg: float = PydanticField(default=0.0, ge=0.0)
    max_steps: int = PydanticField(default=5_000_000, gt=0)
    symmetrize: bool = True


SERIES_COLUMNS = [
    "t",
    "dt",
    "max_grad",
    "argmax_x_bottom",
    "min_uy",
    "max_ux_right_half",
    "bernstein_grad",
    "bernstein_u",
    "max_J",
    "max_ut_abs",
    "symmetry_defect",
]


class MonitorRow(FrozenModel):
    """One accepted step; ``max_J`` is NaN when no J parameters are configured."""

    t: float
    dt: float
    max_grad: float
    argmax_x_bottom: float
    min_uy: float
    max_ux_right_half: float
    bernstein_grad: float
    bernstein_u: float
    max_J: float
    max_ut_abs: float
    symmetry_defect: float


class RunResult(LabModel):
    status: RunStatus
    t_final: float
    steps: int
    grad_max: float
    initial_max_grad: float
    hamiltonian_scheme: HamiltonianScheme
    snapshots: List[Field]
    series: List[MonitorRow]

    @property
    def blew_up(self) -> bool:
        return self.status is RunStatus.GRADIENT_BLOW_UP

    def snapshot_times(self) -> List[float]:
        return [s.time for s in self.snapshots]

    def nearest_snapshot(self, t: float) -> Field:
        return min(self.snapshots, key=lambda s: abs(s.time - t))

    def window(self, start_fraction: float = 0.5) -> List[Field]:
        """Snapshots in [start_fraction * t_final, t_final]."""
        start = start_fraction * self.t_final
        return [s for s in self.snapshots if s.time >= start]
