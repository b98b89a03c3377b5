import numpy as np
import pytest
from sklearn.base import clone

from stefan_lab.barriers import radial_rate, time_derivative_floor
from stefan_lab.errors import FitError, InputError
from stefan_lab.fields import ScalarField
from stefan_lab.rates import (ExtinctionRateRegressor, check_envelope, estimate_tstar,
                              fit_rate, fit_samples, lipschitz_profile, rate_coordinates,
                              synthetic_history)
from stefan_lab.solver.simulate import ContactSetHistory

S = np.geomspace(1e-8, 1e-2, 400)


def test_rate_coordinates():
    x, y = rate_coordinates([np.exp(-4.0)], [np.exp(-2.0) * 3.0], "sqrtlog_2d")
    assert x[0] == pytest.approx(2.0) and y[0] == pytest.approx(np.log(3.0))
    x, _ = rate_coordinates([np.exp(-np.e)], [1.0], "loglog_nd")
    assert x[0] == pytest.approx(1.0)
    with pytest.raises(InputError):
        rate_coordinates([0.1], [0.1], "cubic")


def test_planar_synthetic_slope():
    # sqrt(s) exp(-sqrt(|log s| / 2)) is exactly linear in sqrt|log s| with slope -1/sqrt 2
    fit = fit_rate(synthetic_history("radial", S, n=2), "sqrtlog_2d", exclude_last=0)
    assert fit.slope == pytest.approx(-1 / np.sqrt(2), abs=1e-10)
    assert fit.rms < 1e-12


@pytest.mark.parametrize("n", [3, 4, 5])
def test_higher_dim_synthetic_slope(n):
    fit = fit_rate(synthetic_history("radial", S, n=n), "loglog_nd", exclude_last=0)
    assert fit.slope == pytest.approx(-1 / (n - 2), abs=1e-10)
    lo, hi = fit.confidence_interval()
    assert lo <= fit.slope <= hi


def test_sqrt_rate_has_zero_slope():
    for model in ("sqrtlog_2d", "loglog_nd"):
        fit = fit_rate(synthetic_history("sqrt", S), model, exclude_last=0)
        assert fit.slope == pytest.approx(0.0, abs=1e-10)


def test_slope_invariant_under_radius_scaling():
    lam = radial_rate(S, 3)
    a = fit_samples(S, lam, "loglog_nd")
    b = fit_samples(S, 7.5 * lam, "loglog_nd")
    assert b.slope == pytest.approx(a.slope, abs=1e-12)
    assert b.intercept - a.intercept == pytest.approx(np.log(7.5))


def test_noisy_fit_stays_within_tolerance(rng):
    lam = radial_rate(S, 2) * np.exp(0.01 * rng.standard_normal(S.size))
    fit = fit_samples(S, lam, "sqrtlog_2d")
    assert abs(fit.slope + 1 / np.sqrt(2)) < 0.02


def test_fit_window_and_resolution_filters():
    hist = synthetic_history("radial", S, n=3)
    fit = fit_rate(hist, "loglog_nd", window=(1e-6, 1e-3), exclude_last=0)
    assert fit.window[0] >= 1e-6 and fit.window[1] <= 1e-3
    with pytest.raises(FitError):
        fit_rate(hist, "loglog_nd", window=(1e-4, 1e-3))   # one decade
    with pytest.raises(FitError):
        fit_rate(hist, "loglog_nd", h=0.05)                # everything below 4h
    few = synthetic_history("radial", np.geomspace(1e-8, 1e-2, 10), n=3)
    with pytest.raises(FitError):
        fit_rate(few, "loglog_nd")


def test_exclude_last_drops_final_samples():
    hist = synthetic_history("radial", S, n=3)
    a = fit_rate(hist, "loglog_nd", exclude_last=0)
    b = fit_rate(hist, "loglog_nd", exclude_last=5)
    assert a.samples - b.samples == 5
    assert b.window[0] > a.window[0]


def test_fit_to_dict_is_serializable():
    import json
    d = fit_samples(S, radial_rate(S, 3), "loglog_nd").to_dict()
    json.dumps(d)
    assert set(d) >= {"slope", "intercept", "rms", "ci95", "samples"}


def test_regressor_protocol():
    reg = ExtinctionRateRegressor(model="loglog_nd")
    assert clone(reg).get_params() == reg.get_params()
    lam = 0.3 * radial_rate(S, 4)
    reg.fit(S[:, None], lam)
    assert reg.slope_ == pytest.approx(-0.5, abs=1e-10)
    np.testing.assert_allclose(reg.predict(S), lam, rtol=1e-9)
    assert reg.score(S, lam) == pytest.approx(1.0, abs=1e-12)


def test_estimate_tstar_from_shrinking_radius():
    t = np.linspace(0.0, 0.9, 50)
    lam = np.sqrt(1.3 * (1.0 - t))
    hist = ContactSetHistory(t, lam, lam, lam ** 2)
    assert estimate_tstar(hist) == pytest.approx(1.0, rel=1e-10)
    hist.t_star = 0.77
    assert estimate_tstar(hist) == 0.77
    grow = ContactSetHistory(t, 1 + t, 1 + t, 1 + t)
    with pytest.raises(FitError):
        estimate_tstar(grow)


# --------------------------------------------------------------- envelopes

def test_radial_rates_sit_inside_envelopes():
    assert check_envelope(synthetic_history("radial", S, n=2), "planar").ok
    assert check_envelope(synthetic_history("radial", S, n=3), "higher_dim", n=3).ok
    assert check_envelope(synthetic_history("radial", S, n=4), "higher_dim", n=4).ok


@pytest.mark.parametrize("kind,n", [("planar", 2), ("higher_dim", 3)])
def test_sqrt_rate_violates_outer_envelope(kind, n):
    rep = check_envelope(synthetic_history("sqrt", S), kind, n=n)
    assert not rep.outer_ok and not rep.ok


@pytest.mark.parametrize("kind,n", [("planar", 2), ("higher_dim", 3)])
def test_linear_rate_violates_inner_envelope(kind, n):
    rep = check_envelope(synthetic_history("linear", S), kind, n=n)
    assert not rep.inner_ok and not rep.ok


def test_envelope_report_fields():
    rep = check_envelope(synthetic_history("radial", S, n=2), "planar", delta=0.2)
    d = rep.to_dict()
    assert d["ok"] and d["delta"] == 0.2 and d["samples"] == S.size
    assert rep.c1 > 0 and rep.C1 > 0
    with pytest.raises(InputError):
        check_envelope(synthetic_history("radial", S), "oval")
    with pytest.raises(FitError):
        check_envelope(synthetic_history("radial", S), window=(1.0, 2.0))


# ---------------------------------------------------------- gradient ratio

def heat_snapshots(h=1 / 256, times=np.linspace(-0.3, 0.0, 31)):
    # u = x^2/2 + t + 1 has u_t = 1 and |u_x| = |x|
    x = np.arange(-1, 1 + h / 2, h)
    return [ScalarField(x ** 2 / 2 + t + 1, h, [-1.0], t, 1) for t in times]


def test_lipschitz_ratio_of_heat_polynomial():
    radii = np.array([0.4, 0.2, 0.1, 0.05])
    tab = lipschitz_profile(heat_snapshots(), [0.0], 0.0, radii, n=2)
    h = 1 / 256
    # max |x| < r on the grid, divided by u_t = 1
    np.testing.assert_allclose(tab.ratio, tab.r - h, atol=2 * h)
    assert not tab.unreliable.any() and tab.bounded
    tau = time_derivative_floor(2 * tab.r, 2, 0)
    assert tab.constant == pytest.approx(np.max(tab.normalized * tau))


def test_lipschitz_flags_static_snapshots():
    h = 1 / 64
    x = np.arange(-1, 1 + h / 2, h)
    snaps = [ScalarField(x ** 2 + 1, h, [-1.0], t, 1) for t in (-0.2, -0.1, 0.0)]
    tab = lipschitz_profile(snaps, [0.0], 0.0, [0.3, 0.2])
    assert tab.unreliable.all() and not tab.bounded
    with pytest.raises(InputError):
        lipschitz_profile(snaps[:1], [0.0], 0.0, [0.3])


@pytest.mark.parametrize("c", [0.5, 0.8, 1.25, 2.0])
def test_slope_stable_under_time_rescaling(c):
    # lam(c s) fitted against s: sqrt(L - log c) = sqrt L - log c / (2 sqrt L) + ..., so the
    # slope shifts by at most |log c| / (2 sqrt 2 L_min) and the shift fades deeper in time
    shifts = []
    for s in (S, np.geomspace(1e-16, 1e-10, 400)):
        fit = fit_samples(s, radial_rate(c * s, 2), "sqrtlog_2d", window=(s.min(), s.max()))
        shift = abs(fit.slope + 1 / np.sqrt(2))
        assert shift <= abs(np.log(c)) / (2 * np.sqrt(2) * abs(np.log(s.max())))
        shifts.append(shift)
    assert shifts[1] < shifts[0]


@pytest.mark.parametrize("lo", [1e-8, 1e-7, 1e-6, 1e-5, 1e-4])
def test_radial_forms_pass_on_every_window(lo):
    window = (lo, lo * 100)
    assert check_envelope(synthetic_history("radial", S, n=2), "planar", window=window).ok
    assert check_envelope(synthetic_history("radial", S, n=3), "higher_dim", n=3,
                          window=window).ok
