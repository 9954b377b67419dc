import pytest

from evolution.schemas import SolverConfig
from evolution.service import run
from grid.schemas import DomainSpec, Field
from grid.service import build_grid
from initial_data.schemas import InitialDataSpec
from scaling.service import validate_params


@pytest.fixture
def params():
    return validate_params(3.0, 5.0, 0.1)


@pytest.fixture
def exps(params):
    return params.exponents


@pytest.fixture
def domain():
    return DomainSpec()


@pytest.fixture
def grid(domain):
    # hx = 0.1, hy = 0.05
    return build_grid(domain, 31, 51)


@pytest.fixture
def linear_field(grid, params):
    return Field(values=grid.boundary_values(params.mu))


@pytest.fixture
def small_bump():
    """Well-prepared data on the default domain: every nodewise condition holds."""
    return InitialDataSpec(eps=0.2, amplitude=0.01)


@pytest.fixture
def linear_run(grid, params, linear_field):
    cfg = SolverConfig(t_end=0.01, snapshot_every=0.004)
    return run(linear_field, grid, params, cfg)


@pytest.fixture
def minimal_config(tmp_path):
    path = tmp_path / "minimal.toml"
    path.write_text("[pde]\np = 3.0\nq = 5.0\nmu = 0.1\n", encoding="utf-8")
    return path


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(
        "\n".join(
            [
                "[pde]",
                "p = 3.0",
                "q = 5.0",
                "mu = 0.1",
                "[grid]",
                "nx = 31",
                "ny = 51",
                "[initial_data]",
                "amplitude = 0.01",
                "[solver]",
                "t_end = 0.02",
                "snapshot_every = 0.01",
                "[barriers]",
                "rho_sweep = []",
                "[barriers.nondeg]",
                "samples = 1000",
                "eps_grid = [0.05]",
                "eta_grid = [0.001]",
                "map_samples = 500",
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    return path
