"""Value types for space-time geometry and the quadratic blow-up classes."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import (check_eta, check_int, check_points, check_positive,
                          check_real, check_vector)
from .errors import InputError


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ParaPoint:
    """A space-time point ``(x, t)`` with ``x`` in R^n, n >= 2."""

    x: np.ndarray
    t: float

    def __post_init__(self):
        x = check_vector(self.x, "x", min_dim=2)
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "t", check_real(self.t, "t"))

    @property
    def dim(self):
        return self.x.size

    def scaled(self, lam):
        """Parabolic dilation ``(lam x, lam^2 t)``."""
        return ParaPoint(lam * self.x, lam * lam * self.t)

    def __eq__(self, other):
        if not isinstance(other, ParaPoint):
            return NotImplemented
        return self.t == other.t and np.array_equal(self.x, other.x)

    def __hash__(self):
        return hash((self.x.tobytes(), self.t))


@dataclass(frozen=True)
class ParaCylinder:
    """The half-open cylinder ``B_r(x0) x (t0 - r^2, t0]``."""

    center: ParaPoint
    radius: float

    def __post_init__(self):
        if not isinstance(self.center, ParaPoint):
            raise InputError("center must be a ParaPoint")
        object.__setattr__(self, "radius", check_positive(self.radius, "radius"))

    def contains(self, p):
        if p.dim != self.center.dim:
            raise InputError("dimension mismatch")
        r = self.radius
        d2 = float(np.sum((p.x - self.center.x) ** 2))
        t0 = self.center.t
        return d2 < r * r and (t0 - r * r) < p.t <= t0

    def contains_many(self, X, T):
        X = check_points(X, "X", self.center.dim)
        T = np.asarray(T, dtype=float).reshape(-1)
        r = self.radius
        d2 = np.sum((X - self.center.x) ** 2, axis=1)
        t0 = self.center.t
        return (d2 < r * r) & (T > t0 - r * r) & (T <= t0)


@dataclass(frozen=True)
class BlowupPolynomial:
    """Homogeneous quadratic ``p(x) = x.Ax / 2`` with ``A >= 0``, ``tr A = 1``."""

    A: np.ndarray
    eigenvalues: np.ndarray = field(init=False, repr=False)
    eigenvectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise InputError(f"A must be square, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InputError("A contains non-finite entries")
        if np.max(np.abs(A - A.T)) > 1e-12:
            raise InputError("A must be symmetric")
        A = 0.5 * (A + A.T)
        w, V = np.linalg.eigh(A)
        if w[0] < -1e-10:
            raise InputError(f"A has negative eigenvalue {w[0]:.3e}")
        if abs(np.trace(A) - 1.0) > 1e-10:
            raise InputError(f"trace(A) = {np.trace(A):.15g}, expected 1")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "eigenvalues", _frozen(np.clip(w, 0.0, None)))
        object.__setattr__(self, "eigenvectors", _frozen(V))

    @classmethod
    def from_diagonal(cls, mu):
        return cls(np.diag(np.asarray(mu, dtype=float)))

    @property
    def dim(self):
        return self.A.shape[0]

    @property
    def kernel_dim(self):
        """Dimension of the zero set ``{p = 0}``."""
        w = self.eigenvalues
        return int(np.sum(w < 1e-9 * w[-1]))

    def __call__(self, x):
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        X = check_points(X, "x", self.dim)
        proj = X @ self.eigenvectors
        vals = 0.5 * (proj ** 2) @ self.eigenvalues
        return float(vals[0]) if single else vals

    def grad(self, x):
        X = check_points(x, "x", self.dim)
        return X @ self.A


def eval_blowup(p, x):
    """Value of the blow-up polynomial ``p`` at ``x``."""
    return p(check_vector(x, "x", dim=p.dim))


@dataclass(frozen=True)
class AncientCaloricPolynomial:
    """``q(x,t) = A t + nu sum_{i>m} x_i^2 - sum_{i<=m} nu_i x_i^2``.

    ``time_coeff`` is A, ``spread`` is nu and ``flat_coeffs`` holds the nu_i
    acting on the first ``m`` coordinates. The coefficients must make q
    solve the heat equation.
    """

    dim: int
    time_coeff: float
    spread: float
    flat_coeffs: tuple = ()

    def __post_init__(self):
        n = check_int(self.dim, "dim", low=1)
        A = check_real(self.time_coeff, "time_coeff", low=0.0)
        nu = check_real(self.spread, "spread", low=0.0)
        coeffs = tuple(float(c) for c in check_vector(self.flat_coeffs, "flat_coeffs")) \
            if len(self.flat_coeffs) else ()
        m = len(coeffs)
        if m > n:
            raise InputError(f"{m} flat coefficients for dimension {n}")
        residual = A - 2.0 * (n - m) * nu + 2.0 * sum(coeffs)
        scale = max(1.0, A, 2.0 * (n - m) * nu)
        if abs(residual) > 1e-12 * scale:
            raise InputError(f"coefficients violate the heat equation (residual {residual:.3e})")
        object.__setattr__(self, "dim", n)
        object.__setattr__(self, "time_coeff", A)
        object.__setattr__(self, "spread", nu)
        object.__setattr__(self, "flat_coeffs", coeffs)

    @classmethod
    def from_coefficients(cls, dim, spread, flat_coeffs=()):
        """Solve the caloricity constraint for the time coefficient."""
        flat = tuple(float(c) for c in flat_coeffs)
        A = 2.0 * (dim - len(flat)) * spread - 2.0 * sum(flat)
        if A < 0:
            raise InputError("coefficients give a negative time coefficient")
        return cls(dim, A, spread, flat)

    @classmethod
    def random(cls, dim, flat_dim, rng):
        """Random admissible coefficients (nonnegative time coefficient)."""
        nu = rng.uniform(0.1, 1.0)
        budget = (dim - flat_dim) * nu
        flat = rng.uniform(-1.0, 1.0, size=flat_dim) * budget / max(flat_dim, 1)
        return cls.from_coefficients(dim, nu, flat)

    @property
    def flat_dim(self):
        return len(self.flat_coeffs)

    def _weights(self):
        w = np.full(self.dim, self.spread)
        w[: self.flat_dim] = -np.asarray(self.flat_coeffs)
        return w

    def __call__(self, x, t):
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        X = check_points(X, "x", self.dim)
        vals = self.time_coeff * np.asarray(t, dtype=float) + (X ** 2) @ self._weights()
        if single:
            return float(np.asarray(vals).reshape(-1)[0])
        return vals

    def grad(self, x, t=None):
        X = check_points(x, "x", self.dim)
        return 2.0 * X * self._weights()


def eval_ancient(q, x, t):
    return q(check_vector(x, "x", dim=q.dim), check_real(t, "t"))


@dataclass(frozen=True)
class ConeDomain:
    """Space-time region where the last ``dim - flat_dim`` coordinates dominate.

    A point belongs to it when ``|y| > aperture * sqrt(|t|)`` and
    ``|y| > aperture * |xbar|``, where ``x = (xbar, y)`` splits off the first
    ``flat_dim`` coordinates. For ``flat_dim = 0`` only the first condition
    applies.
    """

    dim: int
    flat_dim: int
    aperture: float

    def __post_init__(self):
        n = check_int(self.dim, "dim", low=2)
        m = check_int(self.flat_dim, "flat_dim", low=0, high=n - 2)
        object.__setattr__(self, "dim", n)
        object.__setattr__(self, "flat_dim", m)
        object.__setattr__(self, "aperture", check_eta(self.aperture, "aperture"))

    def split(self, X):
        """Return ``(|xbar|, |y|)`` for points ``X`` of shape ``(N, dim)``."""
        X = check_points(X, "x", self.dim)
        m = self.flat_dim
        a = np.sqrt(np.sum(X[:, :m] ** 2, axis=1)) if m else np.zeros(len(X))
        b = np.sqrt(np.sum(X[:, m:] ** 2, axis=1))
        return a, b

    def contains_reduced(self, a, b, t):
        eta = self.aperture
        inside = b > eta * np.sqrt(np.abs(t))
        if self.flat_dim:
            inside &= b > eta * a
        return inside

    def contains_many(self, X, T):
        a, b = self.split(X)
        return self.contains_reduced(a, b, np.asarray(T, dtype=float).reshape(-1))

    def contains(self, p):
        if p.dim != self.dim:
            raise InputError("dimension mismatch")
        return bool(self.contains_many(p.x[None, :], [p.t])[0])
