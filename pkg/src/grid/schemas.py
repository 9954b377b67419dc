from functools import cached_property

import numpy as np
from pydantic import Field as PydanticField, ValidationInfo, field_validator, model_validator

from helpers.models import FrozenModel, LabModel


class DomainSpec(FrozenModel):
    """Rectangle (-a, a) x (0, b) with the inner-box and localization parameters.

    The rectangle is symmetric in x and convex in the x-direction by construction.

    Attributes:
        half_width (float): a.
        height (float): b.
        L1, L2 (float): The domain contains (-L1, L1) x (0, 2*L2).
        rho (float): Localization radius.
        x1, y1 (float): Extents of the J-rectangle D = (0, x1) x (0, y1).
    """

    half_width: float = PydanticField(default=1.5, gt=0.0)
    height: float = PydanticField(default=2.5, gt=0.0)
    L1: float = PydanticField(default=1.0, gt=0.0)
    L2: float = PydanticField(default=1.0, gt=0.0)
    x1: float = PydanticField(default=0.75, gt=0.0)
    rho: float = PydanticField(default=0.5, gt=0.0)
    y1: float = PydanticField(default=0.5, gt=0.0)

    @field_validator("x1")
    @classmethod
    def check_x1(cls, x1: float, info: ValidationInfo) -> float:
        L1 = info.data.get("L1")
        if L1 is not None and not x1 < L1:
            raise ValueError(f"x1={x1} must be < L1={L1} (0 < rho < x1 < L1)")
        return x1

    @field_validator("rho")
    @classmethod
    def check_rho(cls, rho: float, info: ValidationInfo) -> float:
        x1 = info.data.get("x1")
        if x1 is not None and not rho < x1:
            raise ValueError(f"rho={rho} must be < x1={x1} (0 < rho < x1 < L1)")
        return rho

    @model_validator(mode="after")
    def check_geometry(self) -> "DomainSpec":
        if not self.L1 < self.half_width:
            raise ValueError(f"L1={self.L1} must be < half_width={self.half_width}")
        if not 2.0 * self.L2 < self.height:
            raise ValueError(f"2*L2={2.0 * self.L2} must be < height={self.height}")
        if not self.y1 < self.L2:
            raise ValueError(f"y1={self.y1} must be < L2={self.L2}")
        return self


class Grid(FrozenModel):
    """Uniform node grid on [-a, a] x [0, b].

    Arrays are indexed ``[j, i]`` (row j is y_j, column i is x_i) so that a
    row-major flattening runs by y then x. ``nx`` is odd and column ``center``
    is x = 0.
    """

    spec: DomainSpec
    nx: int
    ny: int

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def hx(self) -> float:
        return 2.0 * self.spec.half_width / (self.nx - 1)

    @property
    def hy(self) -> float:
        return self.spec.height / (self.ny - 1)

    @property
    def center(self) -> int:
        return (self.nx - 1) // 2

    @cached_property
    def x(self) -> np.ndarray:
        x = np.linspace(-self.spec.half_width, self.spec.half_width, self.nx)
        # exact mirror symmetry of the abscissae
        x = 0.5 * (x - x[::-1])
        x[self.center] = 0.0
        return x

    @cached_property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, self.spec.height, self.ny)

    @cached_property
    def mesh(self):
        return np.meshgrid(self.x, self.y)

    @cached_property
    def boundary(self) -> "BoundaryMask":
        shape = self.shape
        bottom = np.zeros(shape, dtype=bool)
        top = np.zeros(shape, dtype=bool)
        left = np.zeros(shape, dtype=bool)
        right = np.zeros(shape, dtype=bool)
        bottom[0, :] = True
        top[-1, :] = True
        left[:, 0] = True
        right[:, -1] = True
        return BoundaryMask(bottom=bottom, top=top, left=left, right=right)

    def boundary_values(self, mu: float) -> np.ndarray:
        """Dirichlet data mu*y broadcast to the full node array."""
        return mu * self.mesh[1]


class BoundaryMask(LabModel):
    bottom: np.ndarray
    top: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def any(self) -> np.ndarray:
        return self.bottom | self.top | self.left | self.right

    @property
    def interior(self) -> np.ndarray:
        return ~self.any


class Field(LabModel):
    """Scalar node values of u (or a derived quantity) at one time."""

    values: np.ndarray
    time: float = 0.0

    def mirror(self) -> "Field":
        return Field(values=self.values[:, ::-1].copy(), time=self.time)

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.values - self.values[:, ::-1])))

    def clone(self) -> "Field":
        return Field(values=self.values.copy(), time=self.time)
