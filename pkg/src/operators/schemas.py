from enum import Enum

import numpy as np

from helpers.models import LabModel


class HamiltonianScheme(str, Enum):
    CENTRAL = "central"
    UPWIND = "upwind"


class VectorField(LabModel):
    """Node approximations of (u_x, u_y)."""

    ux: np.ndarray
    uy: np.ndarray

    def norm_squared(self) -> np.ndarray:
        return self.ux * self.ux + self.uy * self.uy

    def norm(self) -> np.ndarray:
        return np.sqrt(self.norm_squared())


class FaceFluxes(LabModel):
    """Flux-form p-Laplacian face fluxes.

    ``fx`` has shape (ny-2, nx-1): x-faces i+1/2 of the interior rows.
    ``fy`` has shape (ny-1, nx-2): y-faces j+1/2 of the interior columns.
    """

    fx: np.ndarray
    fy: np.ndarray
