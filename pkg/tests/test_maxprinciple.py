import numpy as np
import pytest
from scipy.special import j0, j1, jn_zeros

from stefan_lab.errors import InputError
from stefan_lab.solver.maxprinciple import (DiskHeat, disk_initial_value_oracle,
                                            quantitative_max_principle_test)


@pytest.fixture(scope="module")
def fine_solver():
    return DiskHeat(h=1 / 32, dt=1 / 1024)


def test_bessel_series_oracle_converges():
    # u(0, 1) = sum 2 / (z_k J1(z_k)) exp(-z_k^2); later terms are negligible
    z = jn_zeros(0, 3)
    first = 2.0 / (z[0] * j1(z[0])) * np.exp(-z[0] ** 2)
    assert disk_initial_value_oracle(50) == pytest.approx(first, rel=1e-9)
    assert disk_initial_value_oracle(50) == pytest.approx(disk_initial_value_oracle(5), rel=1e-14)
    assert j0(0.0) == 1.0


def test_initial_face_matches_bessel_series(fine_solver):
    s = fine_solver
    val = s.solve(np.ones(s.size), np.zeros((s.steps, s.arcs)))
    assert val == pytest.approx(disk_initial_value_oracle(), rel=0.05)


def test_constant_data_is_reproduced_exactly(fine_solver):
    s = fine_solver
    assert s.solve(np.ones(s.size), np.ones((s.steps, s.arcs))) == pytest.approx(1.0, abs=1e-12)


def test_lateral_data_alone_approaches_one(fine_solver):
    s = fine_solver
    val = s.solve(np.zeros(s.size), np.ones((s.steps, s.arcs)))
    assert val == pytest.approx(1.0 - disk_initial_value_oracle(), rel=0.01)


def test_solution_operator_is_monotone(rng):
    s = DiskHeat(h=1 / 16, dt=1 / 64, arcs=32)
    a0, al = rng.uniform(0, 1, s.size), rng.uniform(0, 1, (s.steps, s.arcs))
    b0, bl = a0 + rng.uniform(0, 1, s.size), al + rng.uniform(0, 1, (s.steps, s.arcs))
    assert s.solve(b0, bl) >= s.solve(a0, al)


def test_element_measures_cover_the_boundary():
    s = DiskHeat(h=1 / 16, dt=1 / 64, arcs=32)
    bottom, lateral = s.element_measures()
    assert bottom.sum() == pytest.approx(np.pi, rel=0.05)
    assert lateral.sum() == pytest.approx(2 * np.pi, rel=1e-12)


def test_theta_is_positive_and_monotone():
    rep = quantitative_max_principle_test(fractions=(0.2, 0.4, 0.6, 0.8), trials=6, seed=3,
                                          h=1 / 16, dt=1 / 64, arcs=32)
    assert rep.monotone
    assert np.all(rep.theta > 0)
    assert rep.constant_value == pytest.approx(1.0, abs=1e-12)
    assert rep.initial_face_value > 0
    assert 0 < rep.initial_face_fraction < 1
    # nested data sets: each trial's values are nondecreasing in the fraction
    assert np.all(np.diff(rep.values, axis=1) >= -1e-14)


def test_report_is_deterministic_in_seed():
    kw = dict(fractions=(0.3, 0.7), trials=3, h=1 / 16, dt=1 / 32, arcs=16)
    a = quantitative_max_principle_test(seed=5, **kw)
    b = quantitative_max_principle_test(seed=5, **kw)
    np.testing.assert_array_equal(a.values, b.values)


def test_fraction_validation():
    with pytest.raises(InputError):
        quantitative_max_principle_test(fractions=(0.0, 0.5))
    with pytest.raises(InputError):
        quantitative_max_principle_test(fractions=(1.2,))
