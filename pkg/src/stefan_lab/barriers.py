"""Closed-form rate functions: competitor profiles, moduli, dyadic radii, envelopes.

Logarithms are natural unless a formula is written with a power of 2, in
which case that power is kept.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_eta, check_int, check_real
from .errors import InputError, RangeError

# conventional parameter values for sweeps (the statements quantify over them)
DEFAULTS = {"gamma": 0.4, "delta": 0.1, "alpha": 0.1, "theta": 0.5, "holder": 0.5,
            "semiconvexity": 0.5, "c1": 1.0, "C1": 1.0, "log_constant": 1.0}


def default_log_decay(n):
    """Default exponent of the logarithmic modulus in dimension ``n >= 3``."""
    return min(1.0, 2.0 / (n - 2)) * 0.9 if n > 2 else 0.9


def competitor_profile(k, eta, r):
    """Radial profile vanishing at ``eta`` and equal to 1 at 1.

    ``k = 2``: ``1 + log r / |log eta|``; ``k > 2``:
    ``(r^(k-2) - eta^(k-2)) / (r^(k-2) (1 - eta^(k-2)))``. Values below
    ``eta`` are negative; competitors clip them to zero.
    """
    k = check_int(k, "k", low=2)
    eta = check_eta(eta)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise InputError("r must be positive")
    if k == 2:
        return 1.0 + np.log(r) / abs(np.log(eta))
    e = eta ** (k - 2)
    return (1.0 - e * r ** (2.0 - k)) / (1.0 - e)


def competitor_profile_derivative(k, eta, r):
    r = np.asarray(r, dtype=float)
    if k == 2:
        return 1.0 / (r * abs(np.log(eta)))
    e = eta ** (k - 2)
    return (k - 2) * e * r ** (1.0 - k) / (1.0 - e)


def _abslog(r):
    r = np.asarray(r, dtype=float)
    if np.any((r <= 0) | (r >= 1)):
        raise RangeError("moduli are defined for r in (0, 1)")
    return np.abs(np.log(r))


def time_derivative_modulus(r, n, gamma=None, decay=None):
    """Bound on ``u_t`` in ``Q_r`` at a point collapsing to a point.

    ``2^(-|log r|^gamma)`` in the plane, ``|log r|^(-decay)`` for ``n >= 3``.
    """
    L = _abslog(r)
    if n == 2:
        g = DEFAULTS["gamma"] if gamma is None else gamma
        return 2.0 ** (-(L ** g))
    e = default_log_decay(n) if decay is None else decay
    return L ** (-e)


def expansion_modulus(r, n, m, gamma=None, decay=None, holder=None, semiconvexity=None):
    """Convergence rate of rescalings to the quadratic blow-up, by stratum.

    ``m = n-1``: ``r^holder``; ``1 <= m <= n-2``: ``|log r|^(-semiconvexity)``;
    ``m = 0``: the time-derivative modulus.
    """
    n = check_int(n, "n", low=2)
    m = check_int(m, "m", low=0, high=n - 1)
    L = _abslog(r)
    if m == n - 1:
        return np.asarray(r, dtype=float) ** (DEFAULTS["holder"] if holder is None else holder)
    if m >= 1:
        return L ** (-(DEFAULTS["semiconvexity"] if semiconvexity is None else semiconvexity))
    return time_derivative_modulus(r, n, gamma, decay)


def time_derivative_floor(r, n, m=0, alpha=None, theta=None, log_constant=None):
    """Lower rate for ``u_t`` at scale ``r`` away from the thin set near the singular point.

    ``n = 2, m = 0``: ``exp(-|log r|^(1/2 + alpha))``; ``n >= 3, m = 0``:
    ``exp(-|log r|^alpha)``; ``m = n-2 >= 1``: ``exp(-C |log r| / log|log r|)``;
    ``1 <= m <= n-3``: ``exp(-|log r|^(1 - theta))``.
    """
    n = check_int(n, "n", low=2)
    m = check_int(m, "m", low=0, high=n - 2)
    a = DEFAULTS["alpha"] if alpha is None else alpha
    L = _abslog(r)
    if m == 0:
        return np.exp(-(L ** (0.5 + a))) if n == 2 else np.exp(-(L ** a))
    if m == n - 2:
        C = DEFAULTS["log_constant"] if log_constant is None else log_constant
        return np.exp(-C * L / np.log(L))
    th = DEFAULTS["theta"] if theta is None else theta
    return np.exp(-(L ** (1.0 - th)))


def dyadic_radii(r0, k_max):
    """``r_k = 2^(1 - 2^k) r0`` for ``k = 0..k_max``; ``r_{k+1} = r_k^2 / (2 r0)``."""
    r0 = check_real(r0, "r0", low=0.0, high=0.25, low_open=True, high_open=True)
    k_max = check_int(k_max, "k_max", low=0)
    k = np.arange(k_max + 1, dtype=float)
    return r0 * 2.0 ** (1.0 - 2.0 ** k)


def lower_bound_accumulator(c0, c, exponents):
    """``c0 c^k 2^(-sum_j 2^j e_j)`` with ``k = len(exponents)``."""
    e = np.asarray(exponents, dtype=float)
    if np.any(e < 0):
        raise InputError("exponents must be nonnegative")
    k = e.size
    j = np.arange(k, dtype=float)
    return float(c0 * c ** k * 2.0 ** (-np.sum(2.0 ** j * e)))


ENVELOPES = ("planar", "higher_dim", "planar_conditional")


@dataclass(frozen=True)
class RateFunction:
    """A named rate function with its parameters, callable on ``r`` (or ``t``)."""

    kind: str
    params: dict = field(default_factory=dict)

    KINDS = ("time_derivative", "expansion", "time_derivative_floor", "envelope_upper",
             "envelope_lower")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InputError(f"unknown rate kind {self.kind!r}")

    def __call__(self, r):
        p = dict(self.params)
        if self.kind == "time_derivative":
            return time_derivative_modulus(r, **p)
        if self.kind == "expansion":
            return expansion_modulus(r, **p)
        if self.kind == "time_derivative_floor":
            return time_derivative_floor(r, **p)
        inner, outer = envelope(p.pop("envelope"), r, **p)
        return outer if self.kind == "envelope_upper" else inner


def envelope(kind, t, delta=None, n=3, c1=1.0, C1=1.0):
    """Annulus ``(inner, outer)`` containing the free boundary at time ``-t``.

    ``planar``: ``c1 sqrt(t) exp(-L^(1/2+delta))``, ``C1 sqrt(t) exp(-L^(1/2-delta))``;
    ``higher_dim``: ``c1 sqrt(t) exp(-L^delta)``, ``C1 sqrt(t) L^(-1/(n-2)+delta)``;
    ``planar_conditional``: ``c1 sqrt(t) exp(-C1 L^(1/2))``, ``C1 sqrt(t) exp(-c1 L^(1/2))``;
    with ``L = |log t|``.
    """
    if kind not in ENVELOPES:
        raise InputError(f"unknown envelope {kind!r}; choose from {ENVELOPES}")
    t = np.asarray(t, dtype=float)
    if np.any((t <= 0) | (t >= 0.5)):
        raise RangeError("envelopes are defined for t in (0, 1/2)")
    L = np.abs(np.log(t))
    rt = np.sqrt(t)
    if kind == "planar_conditional":
        return c1 * rt * np.exp(-C1 * np.sqrt(L)), C1 * rt * np.exp(-c1 * np.sqrt(L))
    d = DEFAULTS["delta"] if delta is None else check_real(delta, "delta", low=0.0)
    if kind == "planar":
        return c1 * rt * np.exp(-(L ** (0.5 + d))), C1 * rt * np.exp(-(L ** (0.5 - d)))
    n = check_int(n, "n", low=3)
    return c1 * rt * np.exp(-(L ** d)), C1 * rt * L ** (-1.0 / (n - 2) + d)


def radial_rate(t, n):
    """Extinction rate of the radially symmetric melting ball, up to constants."""
    t = np.asarray(t, dtype=float)
    L = np.abs(np.log(t))
    if n == 2:
        return np.sqrt(t) * np.exp(-np.sqrt(L / 2))
    return np.sqrt(t) * L ** (-1.0 / (n - 2))
