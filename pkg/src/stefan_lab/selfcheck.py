"""Fast built-in examples with exact answers, run by ``stefan-lab selfcheck``."""

import time

import numpy as np

from . import barriers, frequency, geometry, rates, spectra
from .errors import DomainError, InputError
from .fields import ScalarField
from .solver import maxprinciple
from .solver.config import SolverConfig, parse_config
from .solver.contact import extract_contact_metrics
from .solver.problem import step_lcp
from .solver.simulate import simulate
from .types import AncientCaloricPolynomial, BlowupPolynomial, ConeDomain, ParaPoint

CHECKS = []


def check(fn):
    CHECKS.append(fn)
    return fn


def _close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


@check
def blowup_values():
    p = BlowupPolynomial.from_diagonal([0.5, 0.5])
    q = BlowupPolynomial.from_diagonal([0.0, 1.0])
    return (_close(p(np.array([1.0, 1.0])), 0.5) and p(np.zeros(2)) == 0.0
            and q(np.array([5.0, 0.0])) == 0.0 and q.kernel_dim == 1)


@check
def ancient_values():
    q = AncientCaloricPolynomial(2, 1.0, 0.25)
    rng = np.random.default_rng(1)
    x, t = rng.normal(size=2), -rng.random()
    return (_close(q(np.zeros(2), -1.0), -1.0) and _close(q(np.ones(2), 0.0), 0.5)
            and _close(q(2 * x, 4 * t), 4 * q(x, t)))


@check
def parabolic_distance():
    p = ParaPoint([1.0, 2.0], -1.0)
    return (geometry.para_dist(p, p) == 0.0
            and _close(geometry.para_dist(ParaPoint([3.0, 4.0], -1.0), ParaPoint([0.0, 0.0], -1.0)), 5.0)
            and _close(geometry.para_dist(ParaPoint([0.0, 0.0], -5.0), ParaPoint([0.0, 0.0], -1.0)), 2.0))


@check
def cone_boundary_point_rejected():
    D = ConeDomain(3, 1, 0.2)
    try:
        geometry.cone_boundary_dist(ParaPoint([1.0, 0.2, 0.0], -0.01), D)
    except DomainError:
        return True
    return False


@check
def sandwich_small_aperture():
    D = ConeDomain(2, 0, 1e-6)
    lo, d, up, ok = geometry.sandwich_check(ParaPoint([0.0, 1.0], -0.01), D)
    return ok and abs(lo / up - 1.0) < 1e-5


def _radial_cfg(**kw):
    base = dict(mode="radial", n=2, h=1 / 64, dt=1e-3)
    base.update(kw)
    return SolverConfig(**base)


@check
def inactive_constraint_step():
    cfg = _radial_cfg(boundary_kind="constant", boundary_value=1.0)
    r = np.linspace(0, 1, 65)
    u0 = ScalarField(1.0 + 0 * r, 1 / 64, [0.0], 0.0, 2, r)
    u1 = step_lcp(u0, cfg)
    return bool(np.all(u1.values > 0.9))


@check
def zero_stays_zero():
    cfg = _radial_cfg(boundary_kind="constant", boundary_value=0.0)
    r = np.linspace(0, 1, 65)
    u1 = step_lcp(ScalarField(0 * r, 1 / 64, [0.0], 0.0, 2, r), cfg)
    return bool(np.all(u1.values == 0.0))


@check
def no_ice_no_extinction():
    cfg = _radial_cfg(boundary_kind="constant", boundary_value=1.0, init_kind="constant",
                      init_value=1.0, max_time=0.01)
    res = simulate(cfg, keep_snapshots=False)
    return res.t_star is None and np.all(res.history.volume == 0)


@check
def exact_contact_radius():
    h = 1 / 512
    r = np.arange(0, 1 + h / 2, h)
    m = extract_contact_metrics(ScalarField(np.maximum(r - 0.5, 0) ** 2, h, [0.0], 0.0, 2, r))
    e = extract_contact_metrics(ScalarField(1.0 + r, h, [0.0], 0.0, 2, r))
    return abs(m.inradius - 0.5) <= h and abs(m.circumradius - 0.5) <= h and e.empty


@check
def constant_lateral_data():
    solver = maxprinciple.DiskHeat(1 / 8, 1 / 8, 16)
    v = solver.solve(np.ones(solver.size), np.ones((solver.steps, solver.arcs)))
    return _close(v, 1.0, 1e-10)


@check
def eigenvalue_monotone():
    e = [spectra.ou_radial_eigen(3, eta, R=10, N=1500).eps for eta in (0.05, 0.1, 0.2)]
    return e[0] < e[1] < e[2]


@check
def rayleigh_scale_invariant():
    D = ConeDomain(3, 0, 0.2)
    u = spectra.competitor_descriptor(3, 0, 0.2)
    v = spectra.RadialDescriptor(lambda r: 2 * u.value(r), lambda r: 2 * u.deriv(r), u.inner, u.breaks)
    quad = spectra.QuadSpec(order=8, radial_panels=4)
    return _close(spectra.rayleigh_quotient(u, D, quad), spectra.rayleigh_quotient(v, D, quad), 1e-13)


@check
def selfsimilar_normalization():
    prof = spectra.build_selfsimilar(spectra.ou_radial_eigen(2, 0.2, R=12, N=2000))
    x = np.array([[0.0, 1.0]])
    v1 = prof(x, -1.0)[0]
    y = np.array([[0.3, 0.7]])
    ratio = prof(2 * y, -4 * 0.5)[0] / prof(y, -0.5)[0]
    return _close(v1, 1.0, 1e-10) and _close(ratio, 2 ** (2 * prof.eps), 1e-10)


@check
def log_sobolev_constant():
    lhs, rhs, ok = spectra.log_sobolev_check(lambda X: np.ones(len(X)),
                                             lambda X: np.zeros_like(X), dim=2)
    return ok and abs(lhs) < 1e-12 and abs(rhs) < 1e-12


@check
def kernel_values():
    x = np.array([[0.3, -0.2]])
    return (_close(frequency.gaussian_kernel(np.zeros((1, 2)), -1 / (4 * np.pi))[0], 1.0)
            and _close(frequency.gaussian_kernel(x, -0.3)[0], frequency.gaussian_kernel(-x, -0.3)[0]))


@check
def frequency_scaling():
    w = frequency.ClosedForm(lambda X, t: X[:, 0] + 0.1 * X[:, 1] ** 2 + 0.2 * t, 2)
    lam = frequency.ClosedForm(lambda X, t: 3.0 * (X[:, 0] + 0.1 * X[:, 1] ** 2 + 0.2 * t), 2)
    zero = frequency.ClosedForm(lambda X, t: 0.0 * X[:, 0], 2)
    H = frequency.compute_H(0.25, w)
    return (_close(frequency.compute_H(0.25, lam), 9.0 * H, 1e-10)
            and frequency.compute_H(0.25, zero) == 0.0
            and frequency.compute_D(0.25, frequency.ClosedForm(lambda X, t: 0 * X[:, 0] + 2.0, 2)) == 0.0)


@check
def competitor_endpoints():
    return (abs(barriers.competitor_profile(2, 0.1, 0.1)) < 1e-15
            and _close(barriers.competitor_profile(2, 0.1, 1.0), 1.0))


@check
def dyadic_sequence():
    r = barriers.dyadic_radii(0.2, 3)
    return np.allclose(r, [0.2, 0.1, 0.025, 0.2 / 128], rtol=1e-15, atol=0)


@check
def accumulator_values():
    k = 5
    return (_close(barriers.lower_bound_accumulator(0.3, 0.7, np.zeros(k)), 0.3 * 0.7 ** k)
            and _close(barriers.lower_bound_accumulator(0.3, 0.7, 2.0 ** -np.arange(k)),
                       0.3 * 0.7 ** k * 2.0 ** -k))


@check
def envelopes_vanish():
    t = np.array([1e-4, 1e-12, 1e-40])
    ok = True
    for kind in barriers.ENVELOPES:
        inner, outer = barriers.envelope(kind, t, delta=0.1, n=3)
        ok &= bool(np.all(np.diff(inner / np.sqrt(t)) < 0) and np.all(np.diff(outer / np.sqrt(t)) < 0))
    return ok


@check
def sqrt_rate_zero_slope():
    s = np.logspace(-8, -2, 60)
    return abs(rates.fit_samples(s, np.sqrt(s), "sqrtlog_2d").slope) < 1e-10


@check
def linear_rate_inner_fails():
    s = np.logspace(-8, -2, 60)
    rep = rates.check_envelope(rates.synthetic_history("linear", s), "planar", 0.1)
    return not rep.inner_ok


@check
def config_defaults_and_ranges():
    cfg = parse_config("mode = radial\nn = 2\nh = 0.01\ndt = 0.001\n")
    try:
        parse_config("mode = radial\nn = 2\nh = 0.01\ndt = 0.001\nomega = 2.5\n")
    except InputError:
        return cfg.omega == 1.8 and cfg.boundary_kind == "scaled"
    return False


def run_all(verbose=None):
    """Run every check; returns a list of ``(name, ok, seconds, error)``."""
    out = []
    for fn in CHECKS:
        t0 = time.perf_counter()
        err = None
        try:
            ok = bool(fn())
        except Exception as exc:  # report, do not abort the suite
            ok, err = False, f"{type(exc).__name__}: {exc}"
        out.append((fn.__name__, ok, time.perf_counter() - t0, err))
        if verbose:
            verbose(out[-1])
    return out
