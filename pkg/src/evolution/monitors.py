from typing import Optional

import numpy as np

from diagnostics.j_functional import evaluate_J
from diagnostics.profiles import bernstein_monitor
from diagnostics.schemas import JParams
from evolution.schemas import MonitorRow
from grid.schemas import Field, Grid
from operators.schemas import VectorField
from scaling.schemas import PdeParams


def right_half_columns(grid: Grid) -> slice:
    # the column next to x = 0 is excluded: u_x crosses zero there by symmetry
    return slice(grid.center + 2, grid.nx)


def monitor_row(
    u: Field,
    grad: VectorField,
    ut: Field,
    dt: float,
    grid: Grid,
    params: PdeParams,
    delta: Field,
    jp: Optional[JParams],
    symmetry_defect: float,
) -> MonitorRow:
    g = grad.norm()
    bottom = np.abs(grad.uy[0, :])
    m_grad, m_u = bernstein_monitor(u, delta, params.exponents, grid)
    max_J = evaluate_J(u, jp, grid).max_value if jp is not None else float("nan")
    return MonitorRow(
        t=u.time,
        dt=dt,
        max_grad=float(np.max(g)),
        argmax_x_bottom=float(grid.x[int(np.argmax(bottom))]),
        min_uy=float(np.min(grad.uy)),
        max_ux_right_half=float(np.max(grad.ux[:, right_half_columns(grid)])),
        bernstein_grad=m_grad,
        bernstein_u=m_u,
        max_J=max_J,
        max_ut_abs=float(np.max(np.abs(ut.values))),
        symmetry_defect=symmetry_defect,
    )
