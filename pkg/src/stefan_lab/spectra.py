"""Ornstein-Uhlenbeck eigenproblems on cone complements.

The operator is ``Laplacian - (x/2) . grad`` against the weight
``(4 pi)^(-n/2) exp(-|x|^2/4)``; with this convention linear functions have
eigenvalue 1/2 and an eigenvalue ``eps`` produces a self-similar caloric
function of parabolic degree ``2 eps``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal, solveh_banded
from scipy.optimize import brentq

from ._validation import check_eta, check_int, check_real, check_random_state
from .barriers import competitor_profile, competitor_profile_derivative
from .errors import ConvergenceError, DegenerateError, DomainError, InputError, NumericError
from .quadrature import box_rule, gaussian_expectation_rule, panels, sphere_area
from .types import ConeDomain

CUTOFF = 14.0  # exp(-CUTOFF^2/4) is below double precision relative to O(1)
MAX_TENSOR_NODES = 20_000_000


@dataclass(frozen=True)
class RadialEigen:
    """Principal radial eigenpair on ``(eta, R)`` tabulated at ``r``."""

    n: int
    eta: float
    R: float
    eps: float
    r: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)

    def spline(self):
        """Cubic spline of ``phi`` in the variable ``log(r/eta)``."""
        return CubicSpline(np.log(self.r / self.eta), self.phi)


def ou_radial_eigen(n, eta, R=16.0, N=8000):
    """Smallest Dirichlet eigenvalue of the radial OU operator on ``(eta, R)``.

    Solves ``phi'' + ((n-1)/r - r/2) phi' + eps phi = 0`` with
    ``phi(eta) = phi(R) = 0``. The problem is discretized conservatively on
    the log grid ``r = eta e^s``, symmetrized by the weight, and the lowest
    eigenpair of the tridiagonal matrix is found by bisection and inverse
    iteration. The eigenfunction is returned positive with unit maximum.
    """
    n = check_int(n, "n", low=2)
    eta = check_eta(eta)
    R = check_real(R, "R", low=8.0)
    N = check_int(N, "N", low=16)
    S = np.log(R / eta)
    s = np.linspace(0.0, S, N + 1)
    h = s[1] - s[0]
    r = eta * np.exp(s)
    rh = eta * np.exp(0.5 * (s[1:] + s[:-1]))
    # (P phi_s)_s + eps W phi = 0 with P = r^(n-2) e^(-r^2/4), W = r^n e^(-r^2/4);
    # the common factor eta^(n-2) is dropped from both
    log_p = (n - 2) * np.log(rh / eta) - rh ** 2 / 4
    log_w = n * np.log(r[1:-1] / eta) - r[1:-1] ** 2 / 4 + 2 * np.log(eta)
    shift = log_w.max()
    P = np.exp(log_p - shift)
    W = np.exp(log_w - shift)
    diag = (P[:-1] + P[1:]) / (h * h * W)
    off = -P[1:-1] / (h * h * np.sqrt(W[:-1] * W[1:]))
    try:
        vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0),
                                      lapack_driver="stebz")
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"tridiagonal eigensolve failed: {exc}") from exc
    # Bisection is only accurate to eps_machine * ||T||, which is far above the
    # eigenvalue for small eta; refine by inverse iteration (Cholesky of the
    # positive definite T) and take the quotient in sum-of-squares form.
    band = np.vstack([np.concatenate([[0.0], off]), diag])
    x = vecs[:, 0]
    eps = np.inf
    for _ in range(20):
        x = solveh_banded(band, x)
        x /= np.linalg.norm(x)
        phi = x / np.sqrt(W)
        dphi = np.diff(np.concatenate([[0.0], phi, [0.0]]))
        new = float(np.sum(P * dphi ** 2) / (h * h) / np.sum(W * phi ** 2))
        done = abs(new - eps) <= 1e-14 * new
        eps = new
        if done:
            break
    if not np.isfinite(eps) or eps <= 0:
        raise NumericError(f"non-positive principal eigenvalue {eps}")
    if phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    phi = phi / phi.max()
    if np.any(phi < -1e-12 * phi.max()):
        raise NumericError("principal eigenvector changes sign")
    phi = np.concatenate([[0.0], np.maximum(phi, 0.0), [0.0]])
    return RadialEigen(n, eta, R, eps, r, phi)


def shooting_eigenvalue(n, eta, R=10.0, rtol=1e-11, eps_start=1e-7, factor=1.2):
    """Principal eigenvalue by shooting from ``eta`` and root-finding on ``phi(R)``.

    Independent of the grid solver: integrates the radial ODE with an
    adaptive Runge-Kutta scheme, brackets the first sign change of
    ``phi(R; eps)`` by a geometric scan and refines with Brent's method.
    """
    n = check_int(n, "n", low=2)
    eta = check_eta(eta)
    R = check_real(R, "R", low=1.0)

    def endpoint(eps):
        def rhs(r, y):
            return [y[1], -((n - 1) / r - r / 2) * y[1] - eps * y[0]]
        sol = solve_ivp(rhs, (eta, R), [0.0, 1.0], method="DOP853", rtol=rtol,
                        atol=1e-14)
        if not sol.success:
            raise ConvergenceError(f"shooting integration failed: {sol.message}")
        return sol.y[0, -1]

    lo, f_lo = eps_start, endpoint(eps_start)
    if f_lo <= 0:
        raise ConvergenceError("starting eigenvalue guess already past the first root")
    for _ in range(400):
        hi = lo * factor
        f_hi = endpoint(hi)
        if f_hi <= 0:
            return float(brentq(endpoint, lo, hi, xtol=1e-15, rtol=1e-13))
        lo = hi
    raise ConvergenceError("no sign change found while scanning eigenvalues")


# ---------------------------------------------------------------- descriptors

@dataclass(frozen=True)
class QuadSpec:
    """Composite Gauss-Legendre controls for the Gaussian-weighted integrals."""

    order: int = 16
    angular_panels: int = 10
    radial_panels: int = 8
    cutoff: float = CUTOFF


class RadialDescriptor:
    """Function of ``|x|`` only: ``value(rho)`` and ``deriv(rho)``, zero below ``inner``."""

    def __init__(self, value, deriv, inner, breaks=()):
        self.value = value
        self.deriv = deriv
        self.inner = float(inner)
        self.breaks = tuple(float(b) for b in breaks)

    @classmethod
    def from_eigen(cls, eig):
        sp = eig.spline()
        dsp = sp.derivative()
        lo, hi = eig.eta, eig.R

        def value(rho):
            rho = np.asarray(rho, dtype=float)
            inside = (rho > lo) & (rho < hi)
            return np.where(inside, sp(np.log(np.clip(rho, lo, hi) / lo)), 0.0)

        def deriv(rho):
            rho = np.asarray(rho, dtype=float)
            inside = (rho > lo) & (rho < hi)
            return np.where(inside, dsp(np.log(np.clip(rho, lo, hi) / lo)) / rho, 0.0)

        return cls(value, deriv, lo, breaks=(hi,))


class ProductDescriptor:
    """Function of ``(a, b) = (|xbar|, |y|)``.

    ``evaluate(a, b)`` returns ``(u, du/da, du/db)``; ``angle_breaks`` and
    ``radius_breaks(theta)`` mark kinks in polar coordinates
    ``a = rho cos(theta)``, ``b = rho sin(theta)``.
    """

    def __init__(self, evaluate, angle_breaks=(), radius_breaks=None):
        self.evaluate = evaluate
        self.angle_breaks = tuple(angle_breaks)
        self.radius_breaks = radius_breaks


class CartesianDescriptor:
    """Function on full space given by ``value(X)`` and ``grad(X)`` for ``X`` of shape ``(N, n)``."""

    def __init__(self, value, grad):
        self.value = value
        self.grad = grad


def _gauss_weight(rho, n):
    return (4.0 * np.pi) ** (-n / 2) * np.exp(-rho ** 2 / 4)


def _radial_integrals(u, n, quad):
    """Weighted ``(int |grad u|^2, int u^2)`` for a radial descriptor."""
    top, inner = quad.cutoff, u.inner
    edges = [np.linspace(max(inner, 1.0), top, 4 * quad.radial_panels + 1)]
    if inner < 1.0:
        edges.append(np.geomspace(inner, 1.0, max(2, int(np.ceil(np.log2(1.0 / inner))) + 1)))
    edges.append([b for b in u.breaks if inner < b < top])
    edges = np.unique(np.concatenate(edges))
    rho, w = panels(edges, quad.order)
    meas = sphere_area(n) * rho ** (n - 1) * _gauss_weight(rho, n) * w
    return np.sum(meas * u.deriv(rho) ** 2), np.sum(meas * u.value(rho) ** 2)


def _polar_rule(D, quad, angle_breaks, radius_breaks):
    """Nodes ``(a, b)`` and weights for ``int g(|xbar|, |y|) dx`` over D's slice at t = -1."""
    n, m, eta = D.dim, D.flat_dim, D.aperture
    k = n - m
    th0 = np.arctan(eta)  # b > eta a
    cuts = sorted(set([th0] + [c for c in angle_breaks if th0 < c < np.pi / 2]))
    edges = []
    for lo, hi in zip(cuts, cuts[1:] + [np.pi / 2]):
        grow = np.geomspace(min(lo, 0.05) * 0.5, hi - lo, quad.angular_panels)
        edges.append(np.concatenate([[lo], lo + grow]))
    th_edges = np.unique(np.concatenate(edges))
    theta, wt = panels(th_edges, quad.order)
    A, B, Wt = [], [], []
    for th, w_th in zip(theta, wt):
        lo = eta / np.sin(th)  # b > eta
        if lo >= quad.cutoff:
            continue
        rb = [lo]
        top = min(1.0 / np.sin(th), quad.cutoff)
        if lo < top:
            rb.extend(np.geomspace(lo, top, max(2, int(np.ceil(np.log2(top / lo))) + 1))[1:])
        if radius_breaks is not None:
            rb.extend(x for x in radius_breaks(th) if rb[-1] < x < quad.cutoff)
        rb.extend(np.linspace(rb[-1], quad.cutoff, quad.radial_panels + 1)[1:])
        rb = np.unique(np.array(rb))
        rho, wr = panels(rb, quad.order)
        a, b = rho * np.cos(th), rho * np.sin(th)
        jac = rho ** (n - 1) * np.cos(th) ** (m - 1) * np.sin(th) ** (k - 1)
        A.append(a)
        B.append(b)
        Wt.append(w_th * wr * jac * _gauss_weight(rho, n))
    area = sphere_area(m) * sphere_area(k)
    return np.concatenate(A), np.concatenate(B), area * np.concatenate(Wt)


def _integrals(u, D, quad):
    quad = quad or QuadSpec()
    if isinstance(u, RadialDescriptor):
        if D is None:
            raise InputError("a domain is required")
        return _radial_integrals(u, D.dim, quad)
    if isinstance(u, ProductDescriptor):
        if D is None or D.flat_dim == 0:
            raise InputError("product descriptors need a cone domain with flat_dim >= 1")
        a, b, w = _polar_rule(D, quad, u.angle_breaks, u.radius_breaks)
        val, ua, ub = u.evaluate(a, b)
        return np.sum(w * (ua ** 2 + ub ** 2)), np.sum(w * val ** 2)
    if isinstance(u, CartesianDescriptor):
        if D is None:
            raise InputError("Cartesian descriptors need a domain (use dimension via ConeDomain)")
        n = D.dim
        if D.aperture > 0:
            per_dim = 2 * quad.radial_panels * quad.order
            if per_dim ** n > MAX_TENSOR_NODES:
                raise InputError(f"tensor rule with {per_dim}^{n} nodes is too large")
            X, w = box_rule(n, quad.cutoff, 2 * quad.radial_panels, quad.order)
            w = w * _gauss_weight(np.sqrt(np.sum(X ** 2, axis=1)), n)
        else:
            # smooth integrand on full space: Gauss-Hermite for the weight itself
            X, w = gaussian_expectation_rule(n, quad.order, 1.0)
        val = np.asarray(u.value(X), dtype=float)
        grad = np.asarray(u.grad(X), dtype=float)
        if D.aperture > 0:
            keep = D.contains_many(X, -np.ones(len(X)))
            val, grad = val * keep, grad * keep[:, None]
        return np.sum(w * np.sum(grad ** 2, axis=1)), np.sum(w * val ** 2)
    raise InputError(f"unsupported descriptor {type(u).__name__}")


def rayleigh_quotient(u, D, quad=None):
    """Gaussian-weighted Dirichlet energy over mass for a competitor ``u``.

    ``u`` must vanish outside the slice of ``D`` at ``t = -1``; any such
    competitor gives an upper bound for the principal eigenvalue.
    """
    num, den = _integrals(u, D, quad)
    if not den > 1e-14:
        raise DegenerateError(f"competitor mass {den:.3e} is below 1e-14")
    return float(num / den)


def full_space_calibration(n, quad=None):
    """Quotient of ``u = x_n`` on full space; the exact value is 1/2."""
    n = check_int(n, "n", low=1)
    u = CartesianDescriptor(lambda X: X[:, -1],
                            lambda X: np.broadcast_to(np.eye(n)[-1], X.shape))
    quad = quad or QuadSpec(order=12, radial_panels=6)
    num, den = _integrals(u, _FullSpace(n), quad)
    return float(num / den)


class _FullSpace:
    """Stand-in domain with no cone removed."""

    def __init__(self, n):
        self.dim = n
        self.aperture = 0.0


def competitor_descriptor(n, m, eta):
    """The product competitor ``f(min(1,|y|)) f(|y|/|x|)`` with ``f`` the
    radial profile in ``k = n - m`` dimensions vanishing at ``eta``."""
    n = check_int(n, "n", low=2)
    m = check_int(m, "m", low=0, high=n - 2)
    eta = check_eta(eta)
    k = n - m

    def f(r):
        return np.maximum(competitor_profile(k, eta, np.maximum(r, 1e-300)), 0.0)

    def df(r):
        r = np.asarray(r, dtype=float)
        return np.where(r > eta, competitor_profile_derivative(k, eta, np.maximum(r, 1e-300)), 0.0)

    if m == 0:
        def value(rho):
            return f(np.minimum(1.0, rho))

        def deriv(rho):
            rho = np.asarray(rho, dtype=float)
            return np.where(rho < 1.0, df(rho), 0.0)

        return RadialDescriptor(value, deriv, eta, breaks=(1.0,))

    def evaluate(a, b):
        rho = np.hypot(a, b)
        q = b / rho
        g1 = f(np.minimum(1.0, b))
        g2 = f(q)
        dg1 = np.where(b < 1.0, df(b), 0.0)
        dq = df(q)
        ua = g1 * dq * (-a * b / rho ** 3)
        ub = dg1 * g2 + g1 * dq * a * a / rho ** 3
        return g1 * g2, ua, ub

    return ProductDescriptor(evaluate, angle_breaks=(np.arcsin(eta), np.pi / 6),
                             radius_breaks=lambda th: (1.0 / np.sin(th),))


def competitor_bound(n, m, eta, quad=None):
    """Upper bound on the principal eigenvalue from the explicit competitor."""
    D = ConeDomain(n, m, eta)
    return rayleigh_quotient(competitor_descriptor(n, m, eta), D, quad)


def competitor_mass(n, m, eta, quad=None):
    """Weighted mass ``(4 pi)^(-n/2) int u^2 e^(-|x|^2/4)`` of the competitor."""
    D = ConeDomain(n, m, eta)
    return float(_integrals(competitor_descriptor(n, m, eta), D, quad)[1])


def mass_reference(n, m, quad=None):
    """Weighted measure of ``{2|y| >= |x|} & {|y| >= 1}``."""
    n = check_int(n, "n", low=2)
    m = check_int(m, "m", low=0, high=n - 2)
    quad = quad or QuadSpec()
    k = n - m
    if m == 0:
        rho, w = panels(np.linspace(1.0, quad.cutoff, 4 * quad.radial_panels + 1), quad.order)
        return float(np.sum(sphere_area(n) * rho ** (n - 1) * _gauss_weight(rho, n) * w))
    total = 0.0
    theta, wt = panels(np.linspace(np.pi / 6, np.pi / 2, quad.angular_panels + 1), quad.order)
    for th, w_th in zip(theta, wt):
        rho, wr = panels(np.linspace(1.0 / np.sin(th), quad.cutoff, 4 * quad.radial_panels + 1),
                         quad.order)
        jac = rho ** (n - 1) * np.cos(th) ** (m - 1) * np.sin(th) ** (k - 1)
        total += w_th * np.sum(wr * jac * _gauss_weight(rho, n))
    return float(sphere_area(m) * sphere_area(k) * total)


# -------------------------------------------------------- self-similar profile

def growth_series(eps, n, xi, terms=40):
    """Polynomially growing radial OU solution, normalized as ``(xi^2/4)^eps (1 + O(xi^-2))``.

    Optimally truncated asymptotic expansion of the Tricomi function
    ``U(-eps, n/2, xi^2/4)``; accurate to about ``exp(-xi^2/4)``.
    """
    z = np.asarray(xi, dtype=float) ** 2 / 4
    a, b = -eps, n / 2
    total = np.ones_like(z)
    term = np.ones_like(z)
    live = np.ones(z.shape, dtype=bool)
    for k in range(terms):
        nxt = term * (a + k) * (a - b + 1 + k) / (k + 1) * (-1.0 / z)
        live &= np.abs(nxt) < np.abs(term)
        term = np.where(live, nxt, 0.0)
        total = total + term
    return z ** eps * total


@dataclass(frozen=True)
class SelfSimilarProfile:
    """Caloric function ``c |t|^eps phi(|x| / sqrt|t|)`` for ``t < 0``.

    ``phi`` is the tabulated eigenfunction up to ``tail_start`` and the
    matched growing solution beyond it, so the limit at ``t = 0`` is
    ``c A (|x|^2/4)^eps``.
    """

    n: int
    m: int
    eta: float
    eps: float
    r: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    c_eps: float
    tail_start: float
    tail_coeff: float

    def profile(self, xi):
        xi = np.asarray(xi, dtype=float)
        sp = CubicSpline(np.log(self.r / self.eta), self.phi)
        inner = sp(np.log(np.clip(xi, self.eta, self.tail_start) / self.eta))
        tail = self.tail_coeff * growth_series(self.eps, self.n, np.maximum(xi, self.tail_start))
        out = np.where(xi <= self.tail_start, inner, tail)
        return np.where(xi <= self.eta, 0.0, out)

    def __call__(self, X, t):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        t = np.broadcast_to(np.asarray(t, dtype=float), (len(X),))
        if np.any(t > 0):
            raise DomainError("the self-similar profile is defined for t <= 0")
        rad = np.sqrt(np.sum(X ** 2, axis=1))
        tau = np.abs(t)
        out = np.empty(len(X))
        past = tau > 0
        out[past] = self.c_eps * tau[past] ** self.eps * self.profile(rad[past] / np.sqrt(tau[past]))
        now = ~past
        out[now] = self.c_eps * self.tail_coeff * (rad[now] ** 2 / 4) ** self.eps
        return out


def build_selfsimilar(eig, m=0):
    """Normalize the radial eigenfunction so that the profile equals 1 at ``(e_n, -1)``."""
    if m != 0:
        raise InputError("self-similar profiles are available for m = 0 only")
    sp = eig.spline()
    at_one = float(sp(np.log(1.0 / eig.eta)))
    if not at_one > 1e-12:
        raise NumericError(f"profile value at |x| = 1 is {at_one:.3e}; cannot normalize")
    tail_start = eig.R / 2
    tail_coeff = float(sp(np.log(tail_start / eig.eta))) / float(
        growth_series(eig.eps, eig.n, tail_start))
    return SelfSimilarProfile(eig.n, 0, eig.eta, eig.eps, eig.r, eig.phi, 1.0 / at_one,
                              tail_start, tail_coeff)


@dataclass(frozen=True)
class ProfileReport:
    residual: float
    sup_bound: float
    inf_on_sphere: float
    samples: int


def _heat_residual(profile, X, T, h):
    """Central-difference ``d_t u - Laplacian u`` with per-point steps ``h``."""
    n = profile.n
    hc = h[:, None]
    u_t = (profile(X, T + h * h) - profile(X, T - h * h)) / (2 * h * h)
    lap = -2 * n * profile(X, T)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        lap = lap + profile(X + hc * e, T) + profile(X - hc * e, T)
    return u_t - lap / (h * h)


def check_selfsimilar(profile, samples=1000, step=1e-2, seed=0):
    """Heat residual, sup over ``Q_1`` and inf over ``{|x| = 1/2}`` in ``Q_1``.

    The residual is a central-difference estimate of ``d_t - Laplacian`` at
    random points of the cone domain inside ``Q_1`` (time step ``h^2``,
    spatial step ``h`` capped at a tenth of the distance to the boundary),
    Richardson-extrapolated from ``h`` and ``h/2`` and divided by the sup
    of the profile.
    """
    rng = check_random_state(seed)
    n, eta = profile.n, profile.eta
    X = rng.normal(size=(8 * samples, n))
    X *= (rng.uniform(size=len(X)) ** (1.0 / n) / np.linalg.norm(X, axis=1))[:, None]
    T = -rng.uniform(0.0, 1.0, size=len(X))
    rad = np.linalg.norm(X, axis=1)
    dist = np.minimum(rad - eta * np.sqrt(-T), np.sqrt(-T))
    keep = np.flatnonzero(dist > 1e-3)[:samples]
    X, T, dist = X[keep], T[keep], dist[keep]
    h = np.minimum(step, dist / 10)
    coarse = _heat_residual(profile, X, T, h)
    fine = _heat_residual(profile, X, T, h / 2)
    res = (4 * fine - coarse) / 3
    vals = profile(X, T)
    scale = max(np.max(np.abs(vals)), 1e-300)
    residual = float(np.max(np.abs(res)) / scale)

    Ys = rng.normal(size=(samples, n))
    Ys *= 0.5 / np.linalg.norm(Ys, axis=1)[:, None]
    inf_sphere = float(np.min(profile(Ys, -rng.uniform(0.0, 1.0, size=samples))))
    return ProfileReport(residual, float(scale), inf_sphere, len(X))


# ------------------------------------------------------------- log-Sobolev

class BumpProfile:
    """``f(x) = base + sum_j amp_j exp(-|x - c_j|^2 / (2 w_j^2))``, smooth and positive."""

    def __init__(self, base, centers, widths, amps):
        self.base = float(base)
        self.centers = np.atleast_2d(np.asarray(centers, dtype=float))
        self.widths = np.asarray(widths, dtype=float).reshape(-1)
        self.amps = np.asarray(amps, dtype=float).reshape(-1)

    @classmethod
    def random(cls, dim, rng, bumps=3):
        rng = check_random_state(rng)
        return cls(rng.uniform(0.1, 1.0), rng.normal(scale=1.5, size=(bumps, dim)),
                   rng.uniform(0.3, 1.5, size=bumps), rng.uniform(0.0, 2.0, size=bumps))

    def _terms(self, X):
        d = X[:, None, :] - self.centers[None, :, :]
        e = self.amps * np.exp(-np.sum(d ** 2, axis=2) / (2 * self.widths ** 2))
        return d, e

    def value(self, X):
        return self.base + self._terms(X)[1].sum(axis=1)

    def grad(self, X):
        d, e = self._terms(X)
        return -np.einsum("nj,njk->nk", e / self.widths ** 2, d)


def log_sobolev_check(f, grad=None, dim=2, constant=4.0, slack=1e-8, half_width=CUTOFF,
                      panels_per_dim=12, order=12):
    """Evaluate both sides of the Gaussian log-Sobolev inequality.

    ``lhs = int f^2 log f^2 dmu``, ``rhs = constant int |grad f|^2 dmu +
    (int f^2 dmu) log(int f^2 dmu)`` with ``dmu = (4 pi)^(-n/2) e^(-|x|^2/4) dx``.
    The measure has covariance ``2 I``, for which the sharp constant is 4.
    ``f`` is either an object with ``value``/``grad`` methods or a callable
    accompanied by ``grad``. Returns ``(lhs, rhs, ok)``.
    """
    dim = check_int(dim, "dim", low=1)
    constant = check_real(constant, "constant", low=0.0)
    if grad is None:
        if not hasattr(f, "grad"):
            raise InputError("a gradient is required")
        value, grad = f.value, f.grad
    else:
        value = f
    X, w = box_rule(dim, half_width, panels_per_dim, order)
    w = w * _gauss_weight(np.sqrt(np.sum(X ** 2, axis=1)), dim)
    fv = np.asarray(value(X), dtype=float)
    g = np.asarray(grad(X), dtype=float).reshape(len(X), dim)
    f2 = fv * fv
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = np.where(f2 > 0, f2 * np.log(np.where(f2 > 0, f2, 1.0)), 0.0)
    mass = float(np.sum(w * f2))
    lhs = float(np.sum(w * ent))
    rhs = constant * float(np.sum(w * np.sum(g * g, axis=1))) + (mass * np.log(mass) if mass > 0 else 0.0)
    return lhs, rhs, bool(lhs <= rhs + slack)


def gaussian_mass(dim, half_width=CUTOFF, panels_per_dim=12, order=12):
    """Total mass of the normalized Gaussian weight under the box rule."""
    X, w = box_rule(dim, half_width, panels_per_dim, order)
    return float(np.sum(w * _gauss_weight(np.sqrt(np.sum(X ** 2, axis=1)), dim)))


def eigen_table(n, etas, R=16.0, N=8000, m=0, with_bound=True, quad=None):
    """Rows ``(eta, eps, eps_ub, eps |log eta|, eps eta^-(n-m-2))``; ``eps`` is NaN for m >= 1."""
    rows = []
    for eta in etas:
        eps = ou_radial_eigen(n, eta, R, N).eps if m == 0 else np.nan
        ub = competitor_bound(n, m, eta, quad) if with_bound else np.nan
        key = eps if m == 0 else ub
        rows.append((eta, eps, ub, key * abs(np.log(eta)), key * eta ** (-(n - m - 2))))
    return np.array(rows)
