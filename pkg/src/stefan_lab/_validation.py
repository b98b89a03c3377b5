"""Small argument checkers shared by all modules."""

import numbers

import numpy as np

from .errors import DomainError, InputError


def check_real(value, name, *, low=None, high=None, low_open=False,
               high_open=False, error=InputError):
    """Return ``value`` as a finite float, optionally range-checked."""
    if isinstance(value, bool) or not isinstance(value, (numbers.Real, np.floating, np.integer)):
        raise InputError(f"{name} must be a real number, got {value!r}")
    v = float(value)
    if not np.isfinite(v):
        raise InputError(f"{name} must be finite, got {v}")
    if low is not None and (v < low or (low_open and v == low)):
        bracket = "(" if low_open else "["
        raise error(f"{name}={v} outside {bracket}{low}, ...")
    if high is not None and (v > high or (high_open and v == high)):
        bracket = ")" if high_open else "]"
        raise error(f"{name}={v} outside ..., {high}{bracket}")
    return v


def check_positive(value, name, error=InputError):
    return check_real(value, name, low=0.0, low_open=True, error=error)


def check_int(value, name, *, low=None, high=None):
    if isinstance(value, bool) or not isinstance(value, (numbers.Integral, np.integer)):
        raise InputError(f"{name} must be an integer, got {value!r}")
    v = int(value)
    if low is not None and v < low:
        raise InputError(f"{name}={v} must be >= {low}")
    if high is not None and v > high:
        raise InputError(f"{name}={v} must be <= {high}")
    return v


def check_vector(x, name, dim=None, min_dim=None):
    """Return a finite 1-d float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InputError(f"{name} must be a vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise InputError(f"{name} has length {arr.size}, expected {dim}")
    if min_dim is not None and arr.size < min_dim:
        raise InputError(f"{name} has length {arr.size}, expected >= {min_dim}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def check_points(x, name, dim):
    """Coerce ``x`` to a finite ``(N, dim)`` array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.size != dim:
            raise InputError(f"{name} has length {arr.size}, expected {dim}")
        arr = arr.reshape(1, dim)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise InputError(f"{name} must have shape (N, {dim}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def check_eta(eta, name="eta"):
    """Cone apertures live in (0, 1/4)."""
    return check_real(eta, name, low=0.0, high=0.25, low_open=True,
                      high_open=True)


def check_negative_time(t, name="t"):
    t = check_real(t, name)
    if t >= 0:
        raise DomainError(f"{name} must be negative, got {t}")
    return t


def check_random_state(seed):
    """Return a ``numpy.random.Generator`` for ``seed``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.integer)):
        return np.random.default_rng(seed)
    raise InputError(f"cannot build a random generator from {seed!r}")
