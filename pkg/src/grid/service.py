from typing import Iterator, Tuple

import numpy as np

from grid.schemas import DomainSpec, Field, Grid
from helpers.exceptions import GridError


def build_grid(spec: DomainSpec, nx: int, ny: int) -> Grid:
    """
    Build the uniform node grid of the rectangle.

    Args:
        spec (DomainSpec): Validated domain.
        nx (int): Number of x nodes, odd and >= 5 so that x = 0 is a grid column.
        ny (int): Number of y nodes, >= 5.

    Returns:
        Grid: The grid with hx = 2a/(nx-1) and hy = b/(ny-1).

    Raises:
        GridError: If nx is even or either count is below 5.
    """
    if nx < 5 or ny < 5:
        raise GridError(f"grid needs at least 5 nodes per direction, got nx={nx}, ny={ny}")
    if nx % 2 == 0:
        raise GridError(f"nx={nx} must be odd so that x = 0 is a grid column")
    return Grid(spec=spec, nx=nx, ny=ny)


def boundary_distance(grid: Grid) -> Field:
    """Distance to the rectangle boundary, min(a - |x|, y, b - y), at every node."""
    xx, yy = grid.mesh
    a, b = grid.spec.half_width, grid.spec.height
    delta = np.minimum(np.minimum(a - np.abs(xx), yy), b - yy)
    delta[grid.boundary.any] = 0.0
    return Field(values=delta, time=0.0)


def mirror_index(grid: Grid, i: int) -> int:
    return grid.nx - 1 - i


def nearest_column(grid: Grid, x: float) -> int:
    return int(np.argmin(np.abs(grid.x - x)))


def field_rows(field: Field, grid: Grid) -> Iterator[Tuple[float, float, float]]:
    """Yields (x, y, value) rows, row-major by y then x."""
    for j in range(grid.ny):
        for i in range(grid.nx):
            yield float(grid.x[i]), float(grid.y[j]), float(field.values[j, i])
