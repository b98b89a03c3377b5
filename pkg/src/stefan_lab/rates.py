"""Extinction-rate fits, envelope checks and gradient-ratio tables."""

from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .barriers import ENVELOPES, envelope, time_derivative_floor
from .errors import FitError, InputError

MODELS = ("sqrtlog_2d", "loglog_nd")


def rate_coordinates(s, lam, model):
    """Transformed regression coordinates ``(x, y)`` with ``y = log(lam / sqrt s)``."""
    s = np.asarray(s, dtype=float)
    lam = np.asarray(lam, dtype=float)
    L = np.abs(np.log(s))
    if model == "sqrtlog_2d":
        x = np.sqrt(L)
    elif model == "loglog_nd":
        x = np.log(L)
    else:
        raise InputError(f"unknown model {model!r}; choose from {MODELS}")
    return x, np.log(lam / np.sqrt(s))


@dataclass
class RateFit:
    model: str
    s: np.ndarray
    y: np.ndarray
    slope: float
    intercept: float
    rms: float
    window: tuple
    stderr: float
    samples: int

    def confidence_interval(self, level=0.95):
        q = stats.t.ppf(0.5 + level / 2, max(self.samples - 2, 1))
        return (self.slope - q * self.stderr, self.slope + q * self.stderr)

    def to_dict(self):
        d = {k: v for k, v in asdict(self).items() if k not in ("s", "y")}
        d["window"] = list(self.window)
        d["ci95"] = list(self.confidence_interval())
        return d


def _regress(s, lam, model, window, min_samples):
    x, y = rate_coordinates(s, lam, model)
    if s.size < min_samples:
        raise FitError(f"{s.size} samples in the fit window, need {min_samples}")
    if np.log10(s.max() / s.min()) < 2.0 - 1e-9:
        raise FitError("fit window spans less than two decades of T* - t")
    res = stats.linregress(x, y)
    rms = float(np.sqrt(np.mean((y - (res.intercept + res.slope * x)) ** 2)))
    return RateFit(model, s, y, float(res.slope), float(res.intercept), rms,
                   (float(s.min()), float(s.max())), float(res.stderr), int(s.size))


def fit_samples(s, lam, model, window=(1e-8, 1e-2), min_samples=30):
    """Fit a rate model to raw samples ``lam(s)`` restricted to ``window``."""
    s = np.asarray(s, dtype=float)
    lam = np.asarray(lam, dtype=float)
    keep = (s >= window[0]) & (s <= window[1]) & (lam > 0) & np.isfinite(lam)
    return _regress(s[keep], lam[keep], model, window, min_samples)


def _select(history, t_star, window, h, exclude_last, radius):
    if t_star is None:
        t_star = history.t_star
    if t_star is None:
        raise FitError("history has no extinction time")
    lam = np.asarray(getattr(history, radius), dtype=float)
    s = t_star - history.t
    keep = (lam > 0) & (s > 0)
    idx = np.flatnonzero(keep)
    if exclude_last and idx.size > exclude_last:
        keep[idx[-exclude_last:]] = False
    if history.resolution is not None:
        keep &= lam >= 4 * history.resolution
    elif h is not None:
        keep &= lam >= 4 * h
    keep &= (s >= window[0]) & (s <= window[1])
    return s[keep], lam[keep]


def fit_rate(history, model, t_star=None, window=(1e-8, 1e-2), h=None, exclude_last=5,
             min_samples=30, radius="inradius"):
    """Least-squares fit of ``log(lam/sqrt s)`` against the model coordinate.

    Samples with ``lam < 4 h`` (or below four local mesh spacings when the
    history records them) and the last ``exclude_last`` resolved steps are
    dropped.
    """
    if model not in MODELS:
        raise InputError(f"unknown model {model!r}; choose from {MODELS}")
    s, lam = _select(history, t_star, window, h, exclude_last, radius)
    return _regress(s, lam, model, window, min_samples)


def estimate_tstar(history, tail=10):
    """Extinction time from the recorded value or by extrapolating ``volume^(2/n)`` linearly.

    Falls back to extrapolating the squared inradius, which is asymptotically
    linear in time up to logarithmic factors.
    """
    if history.t_star is not None:
        return float(history.t_star)
    lam = np.asarray(history.inradius, dtype=float)
    keep = lam > 0
    t, q = history.t[keep][-tail:], lam[keep][-tail:] ** 2
    if t.size < 3:
        raise FitError("not enough positive samples to extrapolate the extinction time")
    slope, icpt = np.polyfit(t, q, 1)
    if slope >= 0:
        raise FitError("contact set is not shrinking; cannot extrapolate")
    return float(-icpt / slope)


class ExtinctionRateRegressor(RegressorMixin, BaseEstimator):
    """Regressor for ``lam(s) = sqrt(s) exp(a + b x(s))``.

    ``X`` holds ``s = T* - t`` (shape ``(N, 1)`` or ``(N,)``), ``y`` the radii.
    After ``fit``: ``slope_``, ``intercept_``, ``fit_`` (a :class:`RateFit`).
    """

    def __init__(self, model="sqrtlog_2d", window=(1e-8, 1e-2), min_samples=30):
        self.model = model
        self.window = window
        self.min_samples = min_samples

    def fit(self, X, y):
        s = np.asarray(X, dtype=float).reshape(-1)
        self.fit_ = fit_samples(s, y, self.model, self.window, self.min_samples)
        self.slope_ = self.fit_.slope
        self.intercept_ = self.fit_.intercept
        return self

    def predict(self, X):
        check_is_fitted(self, "slope_")
        s = np.asarray(X, dtype=float).reshape(-1)
        x, _ = rate_coordinates(s, np.ones_like(s), self.model)
        return np.sqrt(s) * np.exp(self.intercept_ + self.slope_ * x)


# ------------------------------------------------------------------ envelopes

@dataclass
class EnvelopeReport:
    kind: str
    delta: float
    c1: float
    C1: float
    inner_drift: float
    outer_drift: float
    inner_ok: bool
    outer_ok: bool
    samples: int
    window: tuple

    @property
    def ok(self):
        return bool(self.inner_ok and self.outer_ok)

    def to_dict(self):
        d = asdict(self)
        d["ok"] = self.ok
        d["window"] = list(self.window)
        return d


def check_envelope(history, kind="planar", delta=0.1, n=3, t_star=None, window=(1e-8, 1e-2),
                   outer_tol=0.05, inner_tol=0.15, min_samples=10):
    """Test whether fixed constants place the history inside the envelope.

    ``C1`` is the largest ratio of the circumradius to the unit outer
    envelope and ``c1`` the smallest ratio of the inradius to the unit inner
    envelope over the window; both are finite on any finite window, so the
    verdict rests on whether they stay bounded as ``s -> 0``. The drift of
    each log-ratio is its least-squares slope against ``|log s|``: the outer
    inclusion fails when the outer ratio grows faster than ``outer_tol``
    and the inner inclusion fails when the inner ratio decays faster than
    ``inner_tol`` per unit of ``|log s|``.
    """
    if kind not in ENVELOPES:
        raise InputError(f"unknown envelope {kind!r}; choose from {ENVELOPES}")
    if t_star is None:
        t_star = history.t_star
    if t_star is None:
        raise FitError("history has no extinction time")
    s = t_star - np.asarray(history.t, dtype=float)
    r_in = np.asarray(history.inradius, dtype=float)
    r_out = np.asarray(history.circumradius, dtype=float)
    keep = (s >= window[0]) & (s <= window[1]) & (s < 0.5) & (r_in > 0) & (r_out > 0)
    if keep.sum() < min_samples:
        raise FitError(f"only {keep.sum()} samples in the envelope window")
    s, r_in, r_out = s[keep], r_in[keep], r_out[keep]
    inner, outer = envelope(kind, s, delta=delta, n=n)
    ratio_out = r_out / outer
    ratio_in = r_in / inner
    L = np.abs(np.log(s))
    drift_out = float(np.polyfit(L, np.log(ratio_out), 1)[0])
    drift_in = float(np.polyfit(L, np.log(ratio_in), 1)[0])
    return EnvelopeReport(kind, float(delta), float(ratio_in.min()), float(ratio_out.max()),
                          drift_in, drift_out, bool(drift_in >= -inner_tol),
                          bool(drift_out <= outer_tol), int(s.size),
                          (float(s.min()), float(s.max())))


def synthetic_history(kind, s, n=2):
    """History whose inradius and circumradius follow a closed form in ``s = T* - t``.

    ``kind``: ``radial`` (the radial extinction rate for dimension ``n``),
    ``sqrt`` (``sqrt s``) or ``linear`` (``s``). ``T* = 0``.
    """
    from .barriers import radial_rate
    from .solver.simulate import ContactSetHistory

    s = np.sort(np.asarray(s, dtype=float))[::-1]
    if kind == "radial":
        lam = radial_rate(s, n)
    elif kind == "sqrt":
        lam = np.sqrt(s)
    elif kind == "linear":
        lam = s.copy()
    else:
        raise InputError(f"unknown synthetic kind {kind!r}")
    return ContactSetHistory(-s, lam, lam, lam ** n, t_star=0.0)


# ------------------------------------------------------------ gradient ratio

@dataclass
class LipschitzTable:
    r: np.ndarray
    ratio: np.ndarray
    normalized: np.ndarray
    constant: float
    bounded: bool
    unreliable: np.ndarray


def _grad_norm(field):
    v = field.values
    if field.radial:
        return np.abs(np.gradient(v, field.coords))
    if v.ndim == 1:
        return np.abs(np.gradient(v, field.h))
    gx, gy = np.gradient(v, field.h)
    return np.hypot(gx, gy)


def _distance(field, anchor):
    if field.radial:
        return field.coords
    axes = field.axes()
    if len(axes) == 1:
        return np.abs(axes[0] - anchor[0])
    X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.hypot(X - anchor[0], Y - anchor[1])


def lipschitz_profile(snapshots, anchor, t_star, radii, n=2, floor=1e-14, **modulus):
    """Tabulate ``max_{Q_r} |grad u| / max(u_t, floor)`` over the positivity set.

    ``u_t`` is the backward difference of consecutive snapshots. A radius is
    flagged unreliable when ``u_t`` is below ``floor`` on more than half of
    the positive nodes. ``constant`` is the smallest ``C`` with
    ``ratio <= C r / tau(2r)`` over the reliable radii, where ``tau`` is the
    gradient-ratio modulus.
    """
    snaps = sorted(snapshots, key=lambda f: f.t)
    if len(snaps) < 2:
        raise InputError("need at least two snapshots")
    anchor = np.atleast_1d(np.asarray(anchor, dtype=float))
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    ratio, unreliable = [], []
    for r in radii:
        best, low, total = 0.0, 0, 0
        for prev, cur in zip(snaps[:-1], snaps[1:]):
            if not (t_star - r * r <= cur.t <= t_star):
                continue
            ut = (cur.values - prev.values) / (cur.t - prev.t)
            g = _grad_norm(cur)
            mask = (_distance(cur, anchor) < r) & (cur.values > 0)
            if not mask.any():
                continue
            total += int(mask.sum())
            low += int(np.sum(ut[mask] < floor))
            best = max(best, float(np.max(g[mask] / np.maximum(ut[mask], floor))))
        ratio.append(best if total else np.nan)
        unreliable.append(bool(total == 0 or low > 0.5 * total))
    ratio = np.array(ratio)
    unreliable = np.array(unreliable)
    normalized = ratio / radii
    good = ~unreliable & np.isfinite(ratio) & (2 * radii < 1)
    if good.any():
        tau = time_derivative_floor(2 * radii[good], n, 0, **modulus)
        C = float(np.max(normalized[good] * tau))
    else:
        C = np.nan
    return LipschitzTable(radii, ratio, normalized, C, bool(np.isfinite(C)), unreliable)
