"""Gaussian-weighted slice functionals and the frequency ``phi = D/H``.

On the slice ``t = -r^2`` below a point, ``H = int w^2 G`` and
``D = 2 r^2 int |grad w|^2 G`` with the backward heat kernel ``G``. For
parabolically ``lambda``-homogeneous caloric ``w`` the ratio is ``lambda``.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_int, check_real
from .errors import DegenerateError, DomainError, InputError, RangeError
from .fields import ScalarField
from .quadrature import box_rule, gauss_legendre, gaussian_expectation_rule, panels, sphere_area
from .types import BlowupPolynomial

CUTOFF_INNER = 0.25
CUTOFF_OUTER = 0.5


def gaussian_kernel(x, t):
    """Backward heat kernel ``(-4 pi t)^(-n/2) exp(|x|^2 / (4t))`` for ``t < 0``.

    ``x`` is a vector (returns a float) or an ``(N, n)`` array.
    """
    t = check_real(t, "t")
    if t >= 0:
        raise DomainError(f"the kernel is defined for t < 0, got t={t}")
    X = np.asarray(x, dtype=float)
    single = X.ndim <= 1
    X = np.atleast_2d(X) if X.ndim else X.reshape(1, 1)
    n = X.shape[1]
    vals = (-4.0 * np.pi * t) ** (-n / 2) * np.exp(np.sum(X ** 2, axis=1) / (4.0 * t))
    return float(vals[0]) if single else vals


def cutoff(rho):
    """Radial bump: 1 on ``[0, 1/4]``, 0 beyond ``1/2``, smooth in between."""
    rho = np.asarray(rho, dtype=float)
    z = (rho - CUTOFF_INNER) / (CUTOFF_OUTER - CUTOFF_INNER)
    out = np.where(rho <= CUTOFF_INNER, 1.0, 0.0)
    mid = (z > 0) & (z < 1)
    zm = z[mid]
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - zm * zm))
    return out


def cutoff_derivative(rho):
    rho = np.asarray(rho, dtype=float)
    width = CUTOFF_OUTER - CUTOFF_INNER
    z = (rho - CUTOFF_INNER) / width
    out = np.zeros_like(rho)
    mid = (z > 0) & (z < 1)
    zm = z[mid]
    d = 1.0 - zm * zm
    out[mid] = np.exp(1.0 - 1.0 / d) * (-2.0 * zm / (d * d)) / width
    return out


# ------------------------------------------------------------------ fields

class ClosedForm:
    """``w(x, t)`` given by callables on ``(N, n)`` points; gradient optional."""

    def __init__(self, value, dim, grad=None, step=1e-6):
        self.value = value
        self.dim = check_int(dim, "dim", low=1)
        self._grad = grad
        self.step = step

    def grad(self, X, t):
        if self._grad is not None:
            return np.asarray(self._grad(X, t), dtype=float).reshape(X.shape)
        g = np.empty_like(X)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = self.step
            g[:, i] = (self.value(X + e, t) - self.value(X - e, t)) / (2 * self.step)
        return g


def as_closed_form(w, dim=None):
    """Wrap caloric polynomials and plain callables as :class:`ClosedForm`."""
    if isinstance(w, ClosedForm):
        return w
    d = getattr(w, "dim", dim)
    if d is None:
        raise InputError("the dimension of a callable field must be given")
    grad = getattr(w, "grad", None)
    return ClosedForm(lambda X, t: np.asarray(w(X, t), dtype=float), d,
                      (lambda X, t: grad(X, t)) if grad is not None else None)


class _Sampler:
    """Spline interpolant of one snapshot of ``w = u - p`` around ``center``."""

    def __init__(self, field, center, p2=None):
        self.field = field
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.p2 = p2
        if field.radial:
            if np.any(self.center != 0):
                raise InputError("radial fields are centered at the origin")
            self.dim = field.n
            self._spl = CubicSpline(field.coords, field.values)
            self._dspl = self._spl.derivative()
            self.extent = float(field.coords[-1])
        elif field.values.ndim == 1:
            self.dim = 1
            ax = field.axes()[0]
            self._spl = CubicSpline(ax, field.values)
            self._dspl = self._spl.derivative()
            self.extent = float(min(self.center[0] - ax[0], ax[-1] - self.center[0]))
        else:
            self.dim = 2
            ax = field.axes()
            self._spl = RectBivariateSpline(ax[0], ax[1], field.values, kx=3, ky=3)
            self.extent = float(min(self.center[0] - ax[0][0], ax[0][-1] - self.center[0],
                                    self.center[1] - ax[1][0], ax[1][-1] - self.center[1]))
        if self.center.size != self.dim and not field.radial:
            raise InputError(f"center has {self.center.size} entries for a {self.dim}-d field")

    def _p2(self, X):
        if self.p2 is None:
            return np.zeros(len(X)), np.zeros_like(X)
        return self.p2(X), self.p2.grad(X)

    def radial_values(self, rho):
        """Value and radial derivative of a radial field minus ``p``."""
        v, dv = self._spl(rho), self._dspl(rho)
        if self.p2 is not None:
            A = self.p2.A
            if not np.allclose(A, np.eye(len(A)) * A[0, 0]):
                raise InputError("radial fields need a rotation-invariant blow-up polynomial")
            v = v - 0.5 * A[0, 0] * rho ** 2
            dv = dv - A[0, 0] * rho
        return v, dv

    def values(self, X):
        """Values and gradients at offsets ``X`` from the center."""
        P = X + self.center
        if self.dim == 1:
            v, g = self._spl(P[:, 0]), self._dspl(P[:, 0])[:, None]
        else:
            v = self._spl.ev(P[:, 0], P[:, 1])
            g = np.stack([self._spl.ev(P[:, 0], P[:, 1], dx=1),
                          self._spl.ev(P[:, 0], P[:, 1], dy=1)], axis=1)
        pv, pg = self._p2(X)
        return v - pv, g - pg


@dataclass
class FieldHistory:
    """Snapshots of a discrete field ordered in time, with the singular point.

    Slices at ``t_star - r^2`` are linearly interpolated in time between the
    two bracketing snapshots.
    """

    snapshots: list
    t_star: float
    center: tuple = (0.0,)
    p2: object = None

    def __post_init__(self):
        if not self.snapshots:
            raise InputError("empty history")
        self.snapshots = sorted(self.snapshots, key=lambda f: f.t)
        self.times = np.array([f.t for f in self.snapshots])
        self._samplers = [_Sampler(f, self.center, self.p2) for f in self.snapshots]

    @property
    def dim(self):
        return self._samplers[0].dim

    @property
    def radial(self):
        return self.snapshots[0].radial

    @property
    def spacing(self):
        return float(self.snapshots[0].h)

    @property
    def extent(self):
        return self._samplers[0].extent

    def bracket(self, t):
        """Snapshot indices and linear weights for time ``t``."""
        T = self.times
        if t < T[0] - 1e-14 or t > T[-1] + 1e-14:
            raise RangeError(f"slice time {t} outside the history [{T[0]}, {T[-1]}]")
        j = int(np.clip(np.searchsorted(T, t), 1, max(len(T) - 1, 1)))
        if len(T) == 1:
            return [(0, 1.0)]
        a = (T[j] - t) / (T[j] - T[j - 1])
        a = float(np.clip(a, 0.0, 1.0))
        return [(j - 1, a), (j, 1.0 - a)]

    def radial_slice(self, r, rho):
        v = np.zeros_like(rho)
        dv = np.zeros_like(rho)
        for k, a in self.bracket(self.t_star - r * r):
            vk, dk = self._samplers[k].radial_values(rho)
            v += a * vk
            dv += a * dk
        return v, dv

    def slice(self, r, X):
        v = np.zeros(len(X))
        g = np.zeros_like(X)
        for k, a in self.bracket(self.t_star - r * r):
            vk, gk = self._samplers[k].values(X)
            v += a * vk
            g += a * gk
        return v, g


# -------------------------------------------------------------- integrals

def _radial_nodes(r, outer, per_panel=16):
    """GL nodes on ``[0, outer]`` resolving the Gaussian of width ``r``."""
    top = min(outer, 30.0 * r)
    breaks = np.unique(np.concatenate([np.linspace(0.0, min(top, 8 * r), 9),
                                       np.linspace(min(top, 8 * r), top, 9)]))
    if top > CUTOFF_INNER > 0 and outer == CUTOFF_OUTER:
        breaks = np.unique(np.append(breaks, CUTOFF_INNER))
    return panels(breaks, per_panel)


def _directions(dim, count=64):
    """Unit vectors and weights integrating over the sphere ``S^(dim-1)``."""
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if dim == 2:
        th = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(count, 2 * np.pi / count)
    if dim == 3:
        z, wz = gauss_legendre(-1.0, 1.0, count // 2)
        ph = 2 * np.pi * np.arange(count) / count
        Z, PH = np.meshgrid(z, ph, indexing="ij")
        s = np.sqrt(1 - Z ** 2)
        U = np.stack([s * np.cos(PH), s * np.sin(PH), Z], axis=-1).reshape(-1, 3)
        W = (wz[:, None] * np.full(count, 2 * np.pi / count)[None, :]).ravel()
        return U, W
    return None, None


def _slice_rule(r, dim, with_cutoff, outer):
    """Nodes ``X`` and weights for ``int f(x) G(x, -r^2) dx`` (Gaussian included)."""
    if not with_cutoff and outer is None:
        return gaussian_expectation_rule(dim, 20 if dim <= 3 else 10, r)
    lim = CUTOFF_OUTER if with_cutoff else outer
    U, Wu = _directions(dim)
    if U is None:
        X, w = box_rule(dim, lim, 8, 8)
        keep = np.sum(X ** 2, axis=1) < lim * lim
        X, w = X[keep], w[keep]
        return X, w * gaussian_kernel(X, -r * r)
    rho, wr = _radial_nodes(r, lim)
    X = (rho[:, None, None] * U[None, :, :]).reshape(-1, dim)
    G = (4 * np.pi * r * r) ** (-dim / 2) * np.exp(-rho ** 2 / (4 * r * r))
    W = ((wr * rho ** (dim - 1) * G)[:, None] * Wu[None, :]).ravel()
    return X, W


def _closed_slice(r, w, with_cutoff):
    X, W = _slice_rule(r, w.dim, with_cutoff, None)
    t = -r * r
    v = np.asarray(w.value(X, t), dtype=float)
    g = w.grad(X, t)
    if with_cutoff:
        rho = np.sqrt(np.sum(X ** 2, axis=1))
        xi = cutoff(rho)
        dxi = cutoff_derivative(rho)
        unit = X / np.where(rho > 0, rho, 1.0)[:, None]
        g = g * xi[:, None] + (v * dxi)[:, None] * unit
        v = v * xi
    return v, g, W


def _discrete_slice(r, hist, with_cutoff):
    lim = CUTOFF_OUTER if with_cutoff else hist.extent
    if lim > hist.extent + 1e-12:
        raise RangeError(f"cutoff support {lim} exceeds the field extent {hist.extent}")
    if hist.radial:
        rho, wr = _radial_nodes(r, lim)
        n = hist.dim
        G = (4 * np.pi * r * r) ** (-n / 2) * np.exp(-rho ** 2 / (4 * r * r))
        W = sphere_area(n) * wr * rho ** (n - 1) * G
        v, dv = hist.radial_slice(r, rho)
        if with_cutoff:
            xi = cutoff(rho)
            dv = dv * xi + v * cutoff_derivative(rho)
            v = v * xi
        return v, dv[:, None], W
    X, W = _slice_rule(r, hist.dim, with_cutoff, lim)
    v, g = hist.slice(r, X)
    if with_cutoff:
        rho = np.sqrt(np.sum(X ** 2, axis=1))
        xi = cutoff(rho)
        unit = X / np.where(rho > 0, rho, 1.0)[:, None]
        g = g * xi[:, None] + (v * cutoff_derivative(rho))[:, None] * unit
        v = v * xi
    return v, g, W


def _slice(r, w, with_cutoff):
    r = check_real(r, "r", low=0.0, low_open=True)
    if isinstance(w, FieldHistory):
        return _discrete_slice(r, w, with_cutoff)
    if isinstance(w, ScalarField):
        raise InputError("wrap snapshots in a FieldHistory with the singular time")
    return _closed_slice(r, as_closed_form(w), with_cutoff)


def compute_H(r, w, with_cutoff=False):
    """``int_{t=-r^2} w^2 G``; ``w`` is a closed form or a :class:`FieldHistory`."""
    v, _, W = _slice(r, w, with_cutoff)
    return float(np.sum(W * v * v))


def compute_D(r, w, with_cutoff=False):
    """``2 r^2 int_{t=-r^2} |grad w|^2 G``."""
    _, g, W = _slice(r, w, with_cutoff)
    return float(2.0 * r * r * np.sum(W * np.sum(g * g, axis=1)))


def frequency(r, w, with_cutoff=False):
    """``D / H`` at radius ``r``."""
    v, g, W = _slice(r, w, with_cutoff)
    H = float(np.sum(W * v * v))
    if not H > 1e-14:
        raise DegenerateError(f"H = {H:.3e} is below 1e-14 at r = {r}")
    D = float(2.0 * r * r * np.sum(W * np.sum(g * g, axis=1)))
    return D / H


@dataclass
class FrequencyCurve:
    r: np.ndarray
    H: np.ndarray
    D: np.ndarray
    phi: np.ndarray
    monotone: bool = True

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("r,H,D,phi\n")
            for row in zip(self.r, self.H, self.D, self.phi):
                fh.write(",".join(format(float(x), ".17g") for x in row) + "\n")


def frequency_curve(w, radii, with_cutoff=False, monotone_tol=1e-6):
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    if np.any((radii <= 0) | (radii >= 1)):
        raise RangeError("radii must lie in (0, 1)")
    H, D = [], []
    for r in radii:
        v, g, W = _slice(r, w, with_cutoff)
        H.append(float(np.sum(W * v * v)))
        D.append(float(2.0 * r * r * np.sum(W * np.sum(g * g, axis=1))))
    H, D = np.array(H), np.array(D)
    if np.any(H <= 1e-14):
        raise DegenerateError("H underflow on the requested radii")
    phi = D / H
    # the frequency is nondecreasing in r, so along decreasing radii it must not grow
    monotone = bool(np.all(np.diff(phi) <= monotone_tol * np.maximum(1.0, np.abs(phi[:-1]))))
    return FrequencyCurve(radii, H, D, phi, monotone)


def estimate_lambda_star(history, radii, with_cutoff=True, min_factor=4.0):
    """Frequency at the smallest radius resolved by the grid (``r >= min_factor h``).

    Returns ``(lambda_star, curve)``; the curve's ``monotone`` flag reports
    whether the tail behaves as the monotonicity formula predicts.
    """
    radii = np.asarray(radii, dtype=float)
    if isinstance(history, FieldHistory):
        floor = min_factor * history.spacing
        keep = radii >= floor
        if not np.all(keep):
            warnings.warn(f"dropping {np.sum(~keep)} radii below {floor:.3g}", RuntimeWarning)
        radii = radii[keep]
    if radii.size == 0:
        raise RangeError("no radius above the grid resolution")
    curve = frequency_curve(history, radii, with_cutoff)
    return float(curve.phi[-1]), curve


class FrequencyEstimator(BaseEstimator):
    """Estimator wrapper around :func:`estimate_lambda_star`.

    ``fit(history)`` stores ``lambda_star_`` and ``curve_``.
    """

    def __init__(self, radii=(0.25, 0.125, 0.0625), with_cutoff=True, min_factor=4.0):
        self.radii = radii
        self.with_cutoff = with_cutoff
        self.min_factor = min_factor

    def fit(self, X, y=None):
        self.lambda_star_, self.curve_ = estimate_lambda_star(
            X, self.radii, self.with_cutoff, self.min_factor)
        return self

    def predict(self, X=None):
        check_is_fitted(self, "lambda_star_")
        return self.lambda_star_


def sample_history(w, t_star, times, axes, center=None, noise=0.0, rng=None, p2=None):
    """Tabulate a closed-form field on a Cartesian grid at several times.

    ``w(X, t)`` is evaluated at ``X - center`` and ``t - t_star``; used for
    synthetic checks of the discrete pipeline.
    """
    w = as_closed_form(w, len(axes))
    axes = [np.asarray(a, dtype=float) for a in axes]
    center = np.zeros(len(axes)) if center is None else np.asarray(center, dtype=float)
    mesh = np.meshgrid(*axes, indexing="ij")
    P = np.stack([m.ravel() for m in mesh], axis=1)
    rng = np.random.default_rng(rng)
    snaps = []
    h = float(axes[0][1] - axes[0][0])
    for t in times:
        vals = np.asarray(w.value(P - center, t - t_star)).reshape(mesh[0].shape)
        if noise:
            vals = vals + noise * rng.standard_normal(vals.shape)
        snaps.append(ScalarField(vals, h, [a[0] for a in axes], t, len(axes)))
    return FieldHistory(snaps, t_star, tuple(center), p2)


class BlowupPolynomialRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``u(x) ~ x.Ax/2`` around a point, with ``tr A = 1``.

    ``X`` holds offsets from the singular point, ``y`` the field values. The
    trace constraint is eliminated by substitution; negative eigenvalues of
    the fit are clipped and the trace renormalized, so ``polynomial_`` is a
    valid :class:`BlowupPolynomial`.
    """

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise InputError("X must have shape (N, n)")
        y = np.asarray(y, dtype=float).reshape(-1)
        n = X.shape[1]
        iu = np.triu_indices(n)
        # free parameters: all upper entries except A[n-1, n-1] = 1 - sum of other diagonals
        cols, keys = [], []
        for i, j in zip(*iu):
            if i == j == n - 1:
                continue
            if i == j:
                cols.append(0.5 * (X[:, i] ** 2 - X[:, n - 1] ** 2))
            else:
                cols.append(X[:, i] * X[:, j])
            keys.append((i, j))
        target = y - 0.5 * X[:, n - 1] ** 2
        coef = np.linalg.lstsq(np.column_stack(cols), target, rcond=None)[0] if cols else []
        A = np.zeros((n, n))
        for (i, j), c in zip(keys, coef):
            A[i, j] = A[j, i] = c
        A[n - 1, n - 1] = 1.0 - np.trace(A)
        w, V = np.linalg.eigh(A)
        w = np.clip(w, 0.0, None)
        A = (V * (w / w.sum())) @ V.T
        self.A_ = 0.5 * (A + A.T)
        self.polynomial_ = BlowupPolynomial(self.A_)
        return self

    def predict(self, X):
        check_is_fitted(self, "A_")
        return self.polynomial_(np.asarray(X, dtype=float))
