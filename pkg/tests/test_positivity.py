import numpy as np
import pytest

from stefan_lab.errors import InputError
from stefan_lab.positivity import almost_positivity_run, calibrate_floor, calibrated_floor


@pytest.mark.parametrize("n,m,eta", [(2, 0, 0.1), (3, 0, 0.1), (3, 1, 0.2)])
def test_calibrated_floor_keeps_solution_nonnegative(n, m, eta):
    nu = calibrate_floor(n, m, eta, h=0.02)
    assert np.isfinite(nu) and nu > 0
    run = almost_positivity_run(n, m, eta, 0.5 * nu, h=0.02)
    assert run.min_value >= -1e-8
    assert run.nodes_checked > 0


@pytest.mark.parametrize("n,m,eta", [(2, 0, 0.1), (3, 1, 0.2)])
def test_floor_is_sharp_on_the_grid(n, m, eta):
    # by linearity, doubling the largest admissible floor drives the minimum negative
    nu = calibrate_floor(n, m, eta, h=0.02)
    assert almost_positivity_run(n, m, eta, 2 * nu, h=0.02).min_value < 0
    assert almost_positivity_run(n, m, eta, 0.999 * nu, h=0.02).min_value >= -1e-8


def test_zero_floor_gives_positive_solution():
    run = almost_positivity_run(3, 1, 0.1, 0.0, h=0.05)
    assert run.min_value >= 0.0


def test_calibrated_floor_takes_min_over_apertures():
    floor, ratios = calibrated_floor(3, 1, etas=(0.1, 0.2), h=0.05)
    assert set(ratios) == {0.1, 0.2}
    assert floor == pytest.approx(0.5 * min(ratios.values()))


def test_input_validation():
    with pytest.raises(InputError):
        calibrate_floor(2, 1, 0.1)
    with pytest.raises(InputError):
        calibrate_floor(3, 0, 0.1, h=0.03)
    with pytest.raises(InputError):
        almost_positivity_run(3, 1, 0.3, 1.0)
    with pytest.raises(InputError):
        almost_positivity_run(3, 1, 0.1, -1.0)
