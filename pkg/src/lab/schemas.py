from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field as PydanticField, model_validator

from barriers.schemas import NondegBarrierParams, SolveMethod
from diagnostics.schemas import JParams
from evolution.schemas import RunResult, RunStatus, SolverConfig
from grid.schemas import DomainSpec, Field, Grid
from helpers.models import FrozenModel, LabModel
from initial_data.schemas import InitialDataSpec, ValidationReport
from scaling.schemas import PdeParams


class GridSection(FrozenModel):
    nx: int = PydanticField(default=151, ge=5)
    ny: int = PydanticField(default=251, ge=5)

    @model_validator(mode="after")
    def check_odd(self) -> "GridSection":
        if self.nx % 2 == 0:
            raise ValueError(f"nx={self.nx} must be odd so that x = 0 is a grid column")
        return self


class JSection(FrozenModel):
    """k is the starting value of the k-search; x1, y1 come from the domain."""

    k: float = PydanticField(default=1.0, gt=0.0)
    alpha: float = 1.5
    sigma: float = 0.08


class NondegSection(FrozenModel):
    eps0: float = PydanticField(default=0.05, gt=0.0)
    eta: float = PydanticField(default=1e-3, gt=0.0)
    r: float = PydanticField(default=0.25, gt=0.0)
    d: float = PydanticField(default=0.25, gt=0.0)
    x0: float = 0.0
    t0: float = PydanticField(default=0.0, ge=0.0)
    T: float = PydanticField(default=1.0, gt=0.0)
    samples: int = PydanticField(default=1_000_000, gt=0)
    eps_grid: List[float] = [0.005, 0.01, 0.02, 0.05, 0.1, 0.2]
    eta_grid: List[float] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0]
    map_samples: int = PydanticField(default=20_000, gt=0)


class BarriersSection(FrozenModel):
    method: SolveMethod = SolveMethod.CG
    eps_fraction: float = PydanticField(default=0.99, gt=0.0, lt=1.0)
    rho_sweep: List[float] = [0.3, 0.4, 0.5]
    nondeg: NondegSection = NondegSection()


class CalibrationSection(FrozenModel):
    """Amplitude bisection; ``t_end`` overrides the solver horizon during calibration."""

    a_lo: float = PydanticField(default=0.01, gt=0.0)
    a_hi: float = PydanticField(default=20.0, gt=0.0)
    rel_width: float = PydanticField(default=0.05, gt=0.0, lt=1.0)
    max_runs: int = PydanticField(default=20, gt=1)
    t_end: Optional[float] = PydanticField(default=0.1, gt=0.0)
    eps_sweep: List[float] = [0.1, 0.15, 0.2]

    @model_validator(mode="after")
    def check_bracket(self) -> "CalibrationSection":
        if not self.a_lo < self.a_hi:
            raise ValueError(f"a_lo={self.a_lo} must be < a_hi={self.a_hi}")
        return self


class SweepSection(FrozenModel):
    """Lists expanded into the cartesian product of runs; empty lists are not swept."""

    mu: List[float] = []
    eps: List[float] = []
    amplitude: List[float] = []
    k: List[float] = []
    grid: List[Tuple[int, int]] = []

    @property
    def empty(self) -> bool:
        return not (self.mu or self.eps or self.amplitude or self.k or self.grid)


class OutputSection(FrozenModel):
    """``dir`` defaults to the OUTPUT_DIR setting; ``seed`` drives barrier sampling only."""

    dir: Optional[str] = None
    seed: int = 0
    snapshot_files: bool = True


class RunSpec(FrozenModel):
    """A complete, validated run configuration.

    Only ``[pde]`` is required; every other section falls back to its documented defaults.
    """

    pde: PdeParams
    domain: DomainSpec = DomainSpec()
    grid: GridSection = GridSection()
    initial_data: InitialDataSpec = InitialDataSpec()
    solver: SolverConfig = SolverConfig()
    j_functional: JSection = JSection()
    barriers: BarriersSection = BarriersSection()
    calibration: CalibrationSection = CalibrationSection()
    sweep: SweepSection = SweepSection()
    output: OutputSection = OutputSection()

    @model_validator(mode="after")
    def check_cross_sections(self) -> "RunSpec":
        mu = self.initial_data.mu
        if mu is not None and mu != self.pde.mu:
            raise ValueError(f"initial_data.mu={mu} differs from pde.mu={self.pde.mu}")
        # JParams and the nondegeneracy box carry their own exponent rules
        _ = self.j_params
        _ = self.nondeg_params
        return self

    @property
    def j_params(self) -> JParams:
        section = self.j_functional
        return JParams(
            p=self.pde.p,
            q=self.pde.q,
            k=section.k,
            alpha=section.alpha,
            sigma=section.sigma,
            x1=self.domain.x1,
            y1=self.domain.y1,
        )

    @property
    def nondeg_params(self) -> NondegBarrierParams:
        section = self.barriers.nondeg.model_dump(include={"eps0", "eta", "r", "d", "x0", "t0", "T"})
        return NondegBarrierParams(beta=self.pde.exponents.beta, **section)


class SimulationOutcome(LabModel):
    grid: Grid
    params: PdeParams
    u0: Field
    validation: ValidationReport
    result: RunResult


class CalibrationStep(BaseModel):
    amplitude: float
    status: RunStatus
    t_final: float


class CalibrationResult(BaseModel):
    """Final bracket (a_lo, a_hi) with a_lo not blowing up and a_hi blowing up."""

    a_lo: float
    a_hi: float
    eps: float
    runs: int
    history: List[CalibrationStep]

    @property
    def threshold(self) -> float:
        return self.a_hi

    @property
    def relative_width(self) -> float:
        return (self.a_hi - self.a_lo) / self.a_hi


class EpsMonotonicity(BaseModel):
    thresholds: Dict[str, float]
    non_increasing: bool


class SelfTestCheck(BaseModel):
    name: str
    value: float
    threshold: float
    passed: bool


class SweepRow(BaseModel):
    name: str
    status: str
    t_final: Optional[float] = None
    steps: Optional[int] = None
    passed: Optional[bool] = None
    failing: List[str] = []
    error: str = ""
