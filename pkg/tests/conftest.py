import numpy as np
import pytest

from stefan_lab.solver import SolverConfig, simulate


def radial_benchmark_config(n):
    return SolverConfig(mode="radial", n=n, h=0.01, dt=1e-3, grid_kind="graded", grid_r_min=1e-9,
                        grid_ratio=1.01, boundary_kind="scaled", boundary_kappa=10.0,
                        init_kind="stationary", init_radius=0.5, time_adaptive=True)


_CACHE = {}


def radial_benchmark(n):
    """Melting-ball run resolved down to s = T* - t ~ 1e-16 (cached per session)."""
    if n not in _CACHE:
        _CACHE[n] = simulate(radial_benchmark_config(n), keep_snapshots=False)
    return _CACHE[n]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
