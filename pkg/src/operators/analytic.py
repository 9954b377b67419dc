"""Closed-form differentiation oracles used to measure consistency of the discrete operators."""

from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from grid.schemas import DomainSpec, Field, Grid
from grid.service import build_grid
from operators.service import hamiltonian, p_laplacian


class QuadraticField(BaseModel):
    """v(X, Y) = c0 + a1*X + a2*Y + (b11*X^2 + 2*b12*X*Y + b22*Y^2)/2."""

    c0: float = 0.0
    a1: float = 0.0
    a2: float = 0.0
    b11: float = 0.0
    b12: float = 0.0
    b22: float = 0.0

    def __call__(self, X, Y):
        return (
            self.c0
            + self.a1 * X
            + self.a2 * Y
            + 0.5 * (self.b11 * X * X + 2.0 * self.b12 * X * Y + self.b22 * Y * Y)
        )

    def grad(self, X, Y) -> Tuple[np.ndarray, np.ndarray]:
        return self.a1 + self.b11 * X + self.b12 * Y, self.a2 + self.b12 * X + self.b22 * Y

    def p_laplacian(self, X, Y, p: float):
        vx, vy = self.grad(X, Y)
        g2 = vx * vx + vy * vy
        lap = self.b11 + self.b22
        quad = vx * vx * self.b11 + 2.0 * vx * vy * self.b12 + vy * vy * self.b22
        return g2 ** (0.5 * (p - 2.0)) * (lap + (p - 2.0) * quad / g2)

    def hamiltonian(self, X, Y, q: float):
        vx, vy = self.grad(X, Y)
        return (vx * vx + vy * vy) ** (0.5 * q)

    def rhs(self, X, Y, p: float, q: float):
        return self.p_laplacian(X, Y, p) + self.hamiltonian(X, Y, q)


RADIAL = QuadraticField(b11=1.0, b22=1.0)


def observed_order(errors: Sequence[float]) -> np.ndarray:
    """Observed convergence orders log2(e_k / e_(k+1)) for successive h-halvings."""
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])


def halving_grids(spec: DomainSpec, nx0: int, ny0: int, levels: int) -> Sequence[Grid]:
    """Grids with spacing halved at each level; nodes of a coarse grid stay nodes."""
    return [
        build_grid(spec, (nx0 - 1) * 2**k + 1, (ny0 - 1) * 2**k + 1) for k in range(levels)
    ]


def pointwise_errors(
    field: QuadraticField,
    grids: Sequence[Grid],
    point: Tuple[float, float],
    p: float,
    q: float,
    operator: str = "p_laplacian",
) -> np.ndarray:
    """
    Absolute error of a discrete operator against its closed form at one node.

    Args:
        field (QuadraticField): Analytic test field.
        grids (Sequence[Grid]): Grids that all contain ``point`` as a node.
        point (Tuple[float, float]): (x, y) of the evaluation node.
        p, q (float): Exponents.
        operator (str): ``p_laplacian`` or ``hamiltonian``.

    Returns:
        np.ndarray: One error per grid.
    """
    x0, y0 = point
    errors = []
    for grid in grids:
        xx, yy = grid.mesh
        u = Field(values=field(xx, yy))
        i = int(np.argmin(np.abs(grid.x - x0)))
        j = int(np.argmin(np.abs(grid.y - y0)))
        if operator == "p_laplacian":
            discrete = p_laplacian(u, grid, p).values[j, i]
            exact = field.p_laplacian(grid.x[i], grid.y[j], p)
        else:
            discrete = hamiltonian(u, grid, q).values[j, i]
            exact = field.hamiltonian(grid.x[i], grid.y[j], q)
        errors.append(abs(discrete - exact))
    return np.array(errors)
