"""Parabolic distance, distances to cone-domain boundaries and Harnack chains."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from ._validation import check_int, check_points, check_positive, check_random_state, check_real
from .errors import DomainError, InputError
from .types import ConeDomain, ParaPoint

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
SANDWICH_SLACK = 1e-9


def para_dist(p, q):
    """``sqrt(|x - y|^2 + |t - s|)``."""
    if p.dim != q.dim:
        raise InputError("points have different dimensions")
    return float(np.sqrt(np.sum((p.x - q.x) ** 2) + abs(p.t - q.t)))


def para_dist_many(X, T, Y, S):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return np.sqrt(np.sum((X - Y) ** 2, axis=-1) + np.abs(np.asarray(T) - np.asarray(S)))


def golden_section(f, lo, hi, tol=1e-12, max_iter=200):
    """Vectorized golden-section minimization of a unimodal ``f`` on ``[lo, hi]``.

    Returns the minimizer and the minimum value, elementwise.
    """
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if np.all(b - a <= tol * np.maximum(1.0, np.abs(a))):
            break
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - GOLDEN * (b - a)
        new_d = a + GOLDEN * (b - a)
        # the surviving interior point is reused, only one new evaluation
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        fc_next = np.where(left, np.nan, fd)
        fd_next = np.where(left, fc, np.nan)
        need = np.where(left, c_next, d_next)
        fneed = f(need)
        fc = np.where(left, fneed, fc_next)
        fd = np.where(left, fd_next, fneed)
        c, d = c_next, d_next
    x = 0.5 * (a + b)
    fx = f(x)
    ends = [(a, f(a)), (b, f(b))]
    for xe, fe in ends:
        better = fe < fx
        x = np.where(better, xe, x)
        fx = np.where(better, fe, fx)
    return x, fx


def time_sheet_distance(b, t, eta):
    """Distance from reduced points ``(|y| = b, t)`` to ``{|y| = eta sqrt|t|}``.

    Later times never help (the time offset enters with the opposite sign),
    so the search runs over earlier sheet times, parametrized by
    ``sigma = sqrt|s| >= sqrt|t|``.
    """
    b = np.asarray(b, dtype=float)
    s0 = np.sqrt(np.abs(np.asarray(t, dtype=float)))

    def objective(sig):
        return (b - eta * sig) ** 2 + sig * sig - s0 * s0

    _, fmin = golden_section(objective, s0, s0 + b + 1.0)
    return np.sqrt(np.maximum(fmin, 0.0))


def lateral_distance(a, b, eta):
    """Distance from ``(|xbar| = a, |y| = b)`` to the cone ``{|y| = eta |xbar|}``."""
    return (np.asarray(b) - eta * np.asarray(a)) / np.sqrt(1.0 + eta * eta)


def reduced_boundary_dist(a, b, t, D):
    d = time_sheet_distance(b, t, D.aperture)
    if D.flat_dim:
        d = np.minimum(d, lateral_distance(a, b, D.aperture))
    return d


def cone_boundary_dist_many(X, T, D, check=True):
    """Vectorized :func:`cone_boundary_dist` for points of shape ``(N, n)``."""
    T = np.asarray(T, dtype=float).reshape(-1)
    a, b = D.split(X)
    if check:
        inside = D.contains_reduced(a, b, T)
        if not np.all(inside):
            raise DomainError(f"{np.count_nonzero(~inside)} point(s) outside the domain")
    return reduced_boundary_dist(a, b, T, D)


def cone_boundary_dist(p, D):
    """Parabolic distance from ``p`` (inside ``D``) to the boundary of ``D``."""
    if p.dim != D.dim:
        raise InputError("dimension mismatch")
    if not D.contains(p):
        raise DomainError("point is not inside the cone domain")
    return float(cone_boundary_dist_many(p.x[None, :], [p.t], D, check=False)[0])


def sandwich_bounds(a, b, t, D):
    """Elementary upper bound on the boundary distance (and its lower companion)."""
    upper = b - D.aperture * np.sqrt(np.abs(t))
    if D.flat_dim:
        upper = np.minimum(upper, b - D.aperture * a)
    return upper / (1.0 + D.aperture), upper


def sandwich_check_many(X, T, D, slack=SANDWICH_SLACK):
    T = np.asarray(T, dtype=float).reshape(-1)
    a, b = D.split(X)
    if not np.all(D.contains_reduced(a, b, T)):
        raise DomainError("sandwich check needs points inside the domain")
    dist = reduced_boundary_dist(a, b, T, D)
    lower, upper = sandwich_bounds(a, b, T, D)
    ok = (dist <= upper + slack) & (lower <= dist + slack)
    return lower, dist, upper, ok


def sandwich_check(p, D, slack=SANDWICH_SLACK):
    """Return ``(lower, dist, upper, ok)`` for one point."""
    if p.dim != D.dim:
        raise InputError("dimension mismatch")
    lo, d, up, ok = sandwich_check_many(p.x[None, :], [p.t], D, slack)
    return float(lo[0]), float(d[0]), float(up[0]), bool(ok[0])


def sample_cylinder(rng, n, count, radius=1.0, center=None, t_center=0.0):
    """Uniform samples from ``B_radius x (t_center - radius^2, t_center]``."""
    g = rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = radius * rng.random(count) ** (1.0 / n)
    X = g * rad[:, None]
    if center is not None:
        X = X + np.asarray(center, dtype=float)
    T = t_center - radius * radius * rng.random(count)
    return X, T


def sample_domain(D, count, rng, radius=1.0, min_dist=0.0, max_tries=1000):
    """Rejection-sample points of ``D`` inside ``Q_radius`` at boundary distance > ``min_dist``."""
    Xs, Ts, got = [], [], 0
    for _ in range(max_tries):
        X, T = sample_cylinder(rng, D.dim, max(4 * (count - got), 64), radius)
        keep = D.contains_many(X, T)
        X, T = X[keep], T[keep]
        if min_dist > 0 and len(X):
            keep = cone_boundary_dist_many(X, T, D, check=False) > min_dist
            X, T = X[keep], T[keep]
        Xs.append(X)
        Ts.append(T)
        got += len(X)
        if got >= count:
            break
    else:
        raise DomainError("could not sample enough admissible points")
    return np.concatenate(Xs)[:count], np.concatenate(Ts)[:count]


def chain_length_bound(delta, growth=1.1, target=3.0 / 8.0):
    """Smallest ``k`` with ``growth**k * delta > target``."""
    k = 0
    while growth ** k * delta <= target:
        k += 1
    return k


def cylinder_inside(x, t, radius, D):
    """Exact test of ``Q_radius(x, t)`` (open ball, half-open interval) lying in ``D``."""
    a, b = D.split(np.asarray(x, dtype=float)[None, :])
    a, b = a[0], b[0]
    eta = D.aperture
    ok = b - radius >= eta * np.sqrt(abs(t) + radius * radius)
    if D.flat_dim:
        ok = ok and lateral_distance(a, b, eta) >= radius
    return bool(ok)


@dataclass
class HarnackChain:
    """Points moving away from the boundary of a cone domain, backwards in time."""

    points: list
    radii: list
    distances: list
    cylinder_inside: list = field(default_factory=list)

    @property
    def length(self):
        return len(self.points) - 1

    @property
    def growth_factors(self):
        d = np.asarray(self.distances)
        return d[1:] / d[:-1]

    def y_norms(self, D):
        return np.array([D.split(p.x[None, :])[1][0] for p in self.points])


def build_harnack_chain(p, D, delta, target_band=(3.0 / 8.0, 2.0 / 3.0)):
    """Push ``p`` outward along its ``y`` direction until ``|y|`` reaches the band.

    Each step moves ``|y|`` by half the current boundary distance ``d`` and
    goes back in time by ``d^2/4``; the step radius is ``d/2``.
    """
    delta = check_positive(delta, "delta")
    lo_band, hi_band = (check_real(v, "target_band") for v in target_band)
    if p.dim != D.dim:
        raise InputError("dimension mismatch")
    if not D.contains(p):
        raise DomainError("start point is not inside the cone domain")
    if not _in_unit_frame_cylinder(p, 2.0 / 3.0):
        raise DomainError("start point is not inside Q_{2/3}")
    d = cone_boundary_dist(p, D)
    if d <= delta:
        raise DomainError(f"start point is within {delta} of the boundary")
    m = D.flat_dim
    y = p.x[m:]
    direction = y / np.linalg.norm(y)
    xbar = p.x[:m]
    points, radii, dists, inside = [p], [], [d], []
    cur = p
    while np.linalg.norm(cur.x[m:]) < lo_band:
        b = np.linalg.norm(cur.x[m:])
        r = 0.5 * d
        # Q_{d/sqrt2}(cur) contains the next point and stays inside D
        inside.append(cylinder_inside(cur.x, cur.t, d / np.sqrt(2.0) * (1 - 1e-12), D))
        nxt = ParaPoint(np.concatenate([xbar, (b + r) * direction]), cur.t - r * r)
        radii.append(r)
        cur = nxt
        d = cone_boundary_dist(cur, D)
        points.append(cur)
        dists.append(d)
        if len(points) > 10_000:
            raise DomainError("chain did not reach the target band")
    if np.linalg.norm(cur.x[m:]) > hi_band:
        raise DomainError("chain overshot the target band")
    return HarnackChain(points, radii, dists, inside)


def _in_unit_frame_cylinder(p, r):
    return float(np.sum(p.x ** 2)) < r * r and -r * r < p.t <= 0.0


@dataclass
class AccessibilityReport:
    delta: float
    chain_points: int
    min_intermediate_ratio: float
    min_final_ratio: float
    chain_failures: int
    cylinders_inside: bool
    centers: int
    c0_empirical: float
    fractions: np.ndarray = field(repr=False, default=None)

    @property
    def ok(self):
        return self.chain_failures == 0 and self.c0_empirical > 0


def _sample_parabolic_boundary(rng, n, count, radius):
    """Uniform samples of the bottom face and lateral side of ``Q_radius(0,0)``.

    The two pieces are weighted by their n-dimensional measures.
    """
    r2 = radius * radius
    bottom = np.pi ** (n / 2) / gamma(n / 2 + 1) * radius ** n
    lateral = 2 * np.pi ** (n / 2) / gamma(n / 2) * radius ** (n - 1) * r2
    is_side = rng.random(count) < lateral / (bottom + lateral)
    g = rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = np.where(is_side, radius, radius * rng.random(count) ** (1.0 / n))
    X = g * rad[:, None]
    T = np.where(is_side, -r2 * rng.random(count), -r2)
    return X, T


def accessibility_check(D, delta, samples, seed=0, boundary_samples=4000):
    """Empirical check of the accessibility properties of ``D`` at scale ``delta``.

    Part (i): from points at boundary distance >= delta/2 in ``Q_{1-delta}``
    the four-step chain ``|y| += delta/4``, ``t -= delta^2/16`` is built and
    the boundary distances along it are compared with ``11 delta/20``
    (intermediate) and ``delta`` (final). Part (ii): for centers in
    ``D cap Q_{1-2 delta}`` the fraction of the parabolic boundary of
    ``Q_{2 delta}`` lying in ``{dist >= delta} cup complement`` is estimated
    by Monte Carlo; the minimum over centers is the empirical constant.
    """
    delta = check_real(delta, "delta", low=0.0, high=0.5, low_open=True, high_open=True)
    samples = check_int(samples, "samples", low=1)
    rng = check_random_state(seed)
    m, eta = D.flat_dim, D.aperture

    X, T = sample_domain(D, samples, rng, radius=1.0 - delta, min_dist=0.0)
    keep = cone_boundary_dist_many(X, T, D, check=False) >= delta / 2
    X, T = X[keep], T[keep]
    a, b = D.split(X)
    direction = X[:, m:] / b[:, None]
    ratios = []
    inside_all = True
    for i in range(1, 5):
        Xi = np.concatenate([X[:, :m], (b + delta * i / 4)[:, None] * direction], axis=1)
        Ti = T - delta * delta * i / 16
        ratios.append(cone_boundary_dist_many(Xi, Ti, D) / delta)
    for i in range(4):
        Xi = np.concatenate([X[:, :m], (b + delta * i / 4)[:, None] * direction], axis=1)
        Ti = T - delta * delta * i / 16
        for x, t in zip(Xi, Ti):
            inside_all &= cylinder_inside(x, t, delta / 2, D)
    ratios = np.array(ratios)
    inter = ratios[:3].min() if len(X) else np.inf
    final = ratios[3].min() if len(X) else np.inf
    failures = int(np.sum(np.any(ratios[:3] < 11 / 20 - 1e-12, axis=0)
                          | (ratios[3] < 1.0 - 1e-12)))

    n_centers = max(1, samples // 10)
    C, TC = sample_domain(D, n_centers, rng, radius=1.0 - 2 * delta)
    fracs = np.empty(len(C))
    for k, (c, tc) in enumerate(zip(C, TC)):
        Xb, Tb = _sample_parabolic_boundary(rng, D.dim, boundary_samples, 2 * delta)
        Xb = Xb + c
        Tb = Tb + tc
        ab, bb = D.split(Xb)
        inside = D.contains_reduced(ab, bb, Tb)
        good = ~inside
        if np.any(inside):
            dist = reduced_boundary_dist(ab[inside], bb[inside], Tb[inside], D)
            good[inside] = dist >= delta
        fracs[k] = good.mean()
    return AccessibilityReport(delta, len(X), float(inter), float(final), failures,
                               bool(inside_all), len(C), float(fracs.min()), fracs)
