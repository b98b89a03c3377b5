import numpy as np
import pytest
from scipy import integrate
from sklearn.base import clone

from stefan_lab.errors import DegenerateError, DomainError, InputError, RangeError
from stefan_lab.frequency import (BlowupPolynomialRegressor, ClosedForm, FrequencyEstimator,
                                  compute_D, compute_H, cutoff, cutoff_derivative,
                                  estimate_lambda_star, frequency, frequency_curve,
                                  gaussian_kernel, sample_history)
from stefan_lab.types import AncientCaloricPolynomial, BlowupPolynomial

RADII = (0.25, 0.125, 0.0625)


def linear(dim):
    return ClosedForm(lambda X, t: X[:, 0], dim)


def quadratic(dim):
    # |x|^2/(2n) + t solves the heat equation and is parabolically 2-homogeneous
    return ClosedForm(lambda X, t: np.sum(X ** 2, axis=1) / (2 * dim) + t, dim)


def history(w, dim=2, h=1 / 64):
    times = np.sort(np.append(-np.square(RADII), 0.0))
    ax = [np.linspace(-1, 1, int(round(2 / h)) + 1)] * dim
    return sample_history(w, 0.0, times, ax)


# ----------------------------------------------------------------- kernel

def test_kernel_value_at_origin():
    # (-4 pi t)^(-n/2) at x = 0
    for n in (1, 2, 3):
        assert gaussian_kernel(np.zeros(n), -0.25) == pytest.approx((np.pi) ** (-n / 2), rel=1e-14)


def test_kernel_has_unit_mass():
    val, _ = integrate.quad(lambda x: gaussian_kernel([x], -0.3), -np.inf, np.inf)
    assert val == pytest.approx(1.0, abs=1e-10)
    val2, _ = integrate.dblquad(lambda y, x: gaussian_kernel([x, y], -0.1), -5, 5, -5, 5)
    assert val2 == pytest.approx(1.0, abs=1e-8)


def test_kernel_solves_backward_heat_equation():
    x = np.array([0.3, -0.2])
    t, e = -0.2, 1e-4
    G = lambda y, s: gaussian_kernel(y, s)
    dt = (G(x, t + e) - G(x, t - e)) / (2 * e)
    lap = sum((G(x + e * d, t) - 2 * G(x, t) + G(x - e * d, t)) / e ** 2 for d in np.eye(2))
    assert dt + lap == pytest.approx(0.0, abs=1e-5 * abs(dt))


def test_kernel_rejects_nonnegative_time():
    with pytest.raises(DomainError):
        gaussian_kernel([0.0], 0.0)


def test_cutoff_shape_and_derivative():
    rho = np.linspace(0, 0.7, 701)
    c = cutoff(rho)
    assert np.all(c[rho <= 0.25] == 1.0) and np.all(c[rho >= 0.5] == 0.0)
    assert np.all(np.diff(c) <= 0)
    mid = np.linspace(0.26, 0.49, 50)
    e = 1e-6
    fd = (cutoff(mid + e) - cutoff(mid - e)) / (2 * e)
    np.testing.assert_allclose(cutoff_derivative(mid), fd, rtol=1e-5, atol=1e-8)


# ----------------------------------------------------------- closed forms

@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("r", [1 / 8, 1 / 16, 1 / 32])
def test_linear_slice_integrals(n, r):
    # x1 under the Gaussian of variance 2 r^2: H = 2 r^2, D = 2 r^2 * 1
    w = linear(n)
    assert compute_H(r, w) == pytest.approx(2 * r * r, rel=1e-10)
    assert compute_D(r, w) == pytest.approx(2 * r * r, rel=1e-8)
    assert frequency(r, w) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("r", [1 / 8, 1 / 16, 1 / 32])
def test_quadratic_slice_integrals(n, r):
    # |x|^2 has mean 2 n r^2 and variance 8 n r^4, so H = 2 r^4/n and D = 4 r^4/n
    w = quadratic(n)
    assert compute_H(r, w) == pytest.approx(2 * r ** 4 / n, rel=1e-9)
    assert compute_D(r, w) == pytest.approx(4 * r ** 4 / n, rel=1e-7)
    assert frequency(r, w) == pytest.approx(2.0, abs=1e-6)


def test_cubic_heat_polynomial_has_frequency_three():
    w = ClosedForm(lambda X, t: X[:, 0] ** 3 + 6 * X[:, 0] * t, 1)
    for r in (0.05, 0.1, 0.3):
        assert frequency(r, w) == pytest.approx(3.0, abs=1e-6)


def test_random_ancient_polynomials(rng):
    for n, m in ((2, 0), (3, 1), (3, 0), (4, 2)):
        q = AncientCaloricPolynomial.random(n, m, rng)
        assert frequency(0.1, q) == pytest.approx(2.0, abs=1e-5)


def test_analytic_gradient_matches_finite_difference(rng):
    q = AncientCaloricPolynomial.random(3, 1, rng)
    fd = ClosedForm(lambda X, t: q(X, t), 3)
    assert compute_D(0.1, fd) == pytest.approx(compute_D(0.1, q), rel=1e-6)


def test_curve_is_constant_for_homogeneous_fields():
    curve = frequency_curve(quadratic(2), [0.5, 0.25, 0.1, 0.01])
    np.testing.assert_allclose(curve.phi, 2.0, atol=1e-6)
    assert curve.monotone


def test_mixed_homogeneity_interpolates_between_degrees():
    # x1 + x1^3 + 6 x1 t mixes homogeneities 1 and 3: phi increases with r
    w = ClosedForm(lambda X, t: X[:, 0] + X[:, 0] ** 3 + 6 * X[:, 0] * t, 1)
    curve = frequency_curve(w, [0.5, 0.2, 0.05])
    assert np.all(np.diff(curve.phi) < 0) and curve.monotone
    assert 1.0 < curve.phi[-1] < curve.phi[0] < 3.0


def test_zero_field_is_degenerate():
    w = ClosedForm(lambda X, t: np.zeros(len(X)), 2)
    with pytest.raises(DegenerateError):
        frequency(0.1, w)
    with pytest.raises(RangeError):
        frequency_curve(linear(2), [1.5])


def test_callable_without_dimension_is_rejected():
    with pytest.raises(InputError):
        frequency(0.1, lambda X, t: X[:, 0])


# ------------------------------------------------------- discrete fields

def test_discrete_history_matches_closed_form():
    w = ClosedForm(lambda X, t: X[:, 0] ** 2 - X[:, 1] ** 2, 2)
    hist = history(w)
    lam, curve = estimate_lambda_star(hist, RADII[1:], with_cutoff=False)
    assert lam == pytest.approx(2.0, abs=1e-3)
    assert compute_H(0.0625, hist) == pytest.approx(compute_H(0.0625, w), rel=1e-3)


def test_discrete_history_with_cutoff():
    hist = history(quadratic(2))
    lam, curve = estimate_lambda_star(hist, RADII, with_cutoff=True)
    assert lam == pytest.approx(2.0, rel=0.02)


def test_discrete_history_drops_unresolved_radii():
    hist = history(quadratic(2), h=1 / 16)
    with pytest.warns(RuntimeWarning):
        lam, curve = estimate_lambda_star(hist, (0.25, 0.125, 0.01), with_cutoff=False)
    assert curve.r.min() >= 4 / 16


def test_discrete_slice_outside_history():
    hist = history(quadratic(2))
    with pytest.raises(RangeError):
        frequency(0.9, hist)


def test_frequency_estimator_sklearn_protocol():
    est = FrequencyEstimator(radii=RADII[1:], with_cutoff=False)
    assert clone(est).get_params() == est.get_params()
    est.fit(history(quadratic(2)))
    assert est.predict() == pytest.approx(2.0, abs=1e-3)


def test_blowup_regressor_recovers_polynomial(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    A = Q @ np.diag([0.5, 0.3, 0.2]) @ Q.T
    X = rng.uniform(-0.1, 0.1, size=(400, 3))
    y = BlowupPolynomial(A)(X)
    reg = BlowupPolynomialRegressor().fit(X, y)
    np.testing.assert_allclose(reg.A_, A, atol=1e-10)
    assert reg.score(X, y) == pytest.approx(1.0, abs=1e-12)
    assert np.trace(reg.polynomial_.A) == pytest.approx(1.0)


def test_blowup_regressor_projects_to_admissible_set(rng):
    X = rng.uniform(-1, 1, size=(200, 2))
    y = 0.5 * (1.5 * X[:, 0] ** 2 - 0.5 * X[:, 1] ** 2)
    reg = BlowupPolynomialRegressor().fit(X, y)
    assert np.all(np.linalg.eigvalsh(reg.A_) >= -1e-14)
    assert np.trace(reg.A_) == pytest.approx(1.0)
