import numpy as np
import pytest

from memheat.core import Grid, GridFunction, gaussian_bump, make_params
from memheat.solver import SolverConfig, run_simulation


def tall_bump_run(p: float, points: int, snapshot_stride: int = 1):
    params = make_params(1, 1, 0.5, p)
    grid = Grid(dim=1, half_width=10.0, points_per_axis=points)
    config = SolverConfig(
        params=params,
        grid=grid,
        dt0=2e-3,
        t_end=20.0,
        snapshot_stride=snapshot_stride,
    )
    return run_simulation(config, gaussian_bump(grid, 3.0, 1.0))


@pytest.fixture(scope="session")
def bump_run_p2_n1024():
    return tall_bump_run(2.0, 1024)


@pytest.fixture(scope="session")
def bump_run_p2_n2048():
    return tall_bump_run(2.0, 2048, snapshot_stride=50)


@pytest.fixture(scope="session")
def bump_run_p3_n1024():
    return tall_bump_run(3.0, 1024, snapshot_stride=50)


@pytest.fixture(scope="session")
def bump_run_p3_n2048():
    return tall_bump_run(3.0, 2048, snapshot_stride=50)


@pytest.fixture(scope="session")
def constant_run_blowup():
    """u0 = 1 constant data, the scalar-oracle comparison case."""
    params = make_params(1, 1, 0.5, 2.0)
    grid = Grid(dim=1, half_width=10.0, points_per_axis=64)
    config = SolverConfig(params=params, grid=grid, dt0=1e-3, t_end=10.0)
    return run_simulation(config, GridFunction.constant(grid, 1.0))
