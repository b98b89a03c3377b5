"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import numpy as np
import pytest

from conftest import radial_benchmark
from stefan_lab.barriers import radial_rate
from stefan_lab.frequency import ClosedForm, frequency
from stefan_lab.geometry import (build_harnack_chain, cone_boundary_dist, sample_domain,
                                 sandwich_check_many)
from stefan_lab.positivity import almost_positivity_run, calibrated_floor
from stefan_lab.rates import check_envelope, fit_rate, fit_samples, synthetic_history
from stefan_lab.solver import SolverConfig, extract_contact_metrics, simulate
from stefan_lab.spectra import (BumpProfile, eigen_table, gaussian_mass, log_sobolev_check,
                                ou_radial_eigen, shooting_eigenvalue)
from stefan_lab.types import AncientCaloricPolynomial, ConeDomain, ParaPoint
from test_solver import MONOTONE_CONFIGS, time_derivative_floor

BENCH_WINDOW = (1e-6, 1e-2)


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[acceptance {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail
    return emit


def spread(values):
    v = np.asarray(values, dtype=float)
    return float(v.max() / v.min())


def test_1_stationary_obstacle(verdict):
    errs, res_max = [], 0.0
    ok = True
    for h in (1 / 64, 1 / 128, 1 / 256):
        cfg = SolverConfig(mode="cartesian1d", n=1, h=h, dt=0.05, boundary_kind="constant",
                           boundary_value=0.125, init_kind="constant", init_value=0.125,
                           max_time=5.0, snapshot_stride=1000)
        res = simulate(cfg)
        f = res.snapshots[-1]
        x = f.axes()[0]
        contact = x[f.values < cfg.threshold_factor * h * h]
        m = extract_contact_metrics(f)
        # free boundary at the edges of the contact set and at the interpolated crossing
        e = max(abs(contact.min() + 0.5), abs(contact.max() - 0.5),
                abs(m.inradius - 0.5), abs(m.circumradius - 0.5))
        errs.append(e / h)
        res_max = max(res_max, res.stats["max_complementarity_residual"])
        ok &= e <= 2 * h and res.stats["max_complementarity_residual"] <= 1e-10
    verdict(1, "stationary obstacle free boundary", ok,
            f"max |x_fb - 0.5| / h = {max(errs):.3f} (<= 2), residual {res_max:.2e} (<= 1e-10)")


def test_2_monotonicity_and_comparison(verdict):
    floors = [time_derivative_floor(kw) for kw in MONOTONE_CONFIGS]
    lo = SolverConfig(mode="radial", n=2, h=1 / 64, dt=2e-3, boundary_kind="additive",
                      boundary_kappa=0.1, init_kind="p2_shifted", init_shift=0.1,
                      snapshot_stride=1, max_time=0.1)
    hi = lo.with_updates(boundary_kappa=0.3, init_shift=0.05)
    a, b = simulate(lo).snapshots, simulate(hi).snapshots
    gap = max(float(np.max(ua.values - ub.values)) for ua, ub in zip(a, b))
    ok = min(floors) >= -1e-10 and gap <= 1e-10 and len(a) == len(b)
    verdict(2, "monotone data and comparison", ok,
            f"min u_t over 5 configs {min(floors):.2e} (>= -1e-10), max(u_lo - u_hi) {gap:.2e}")


def test_3_frequency_oracle(verdict, rng):
    worst = 0.0
    for n in (2, 3):
        lin = ClosedForm(lambda X, t: X[:, 0], n)
        quad = ClosedForm(lambda X, t, n=n: np.sum(X ** 2, axis=1) / (2 * n) + t, n)
        for r in (1 / 8, 1 / 16, 1 / 32):
            worst = max(worst, abs(frequency(r, lin) - 1.0), abs(frequency(r, quad) - 2.0))
    rand = 0.0
    for n, m in ((2, 0), (3, 0), (3, 1), (4, 2)):
        q = AncientCaloricPolynomial.random(n, m, rng)
        for r in (1 / 8, 1 / 16, 1 / 32):
            rand = max(rand, abs(frequency(r, q) - 2.0))
    verdict(3, "frequency oracle", worst <= 1e-6 and rand <= 1e-5,
            f"closed forms off by {worst:.1e} (<= 1e-6), random ancient off by {rand:.1e} (<= 1e-5)")


def test_4_eigenvalue_scaling(verdict):
    t3 = eigen_table(3, [0.05, 0.025], with_bound=False)
    lin = t3[:, 1] / t3[:, 0]
    t2 = eigen_table(2, [0.1, 0.05, 0.01], with_bound=False)
    lg = t2[:, 3]
    rel = []
    for n, eta in ((2, 0.05), (3, 0.025), (4, 0.1)):
        g, s = ou_radial_eigen(n, eta).eps, shooting_eigenvalue(n, eta)
        rel.append(abs(g - s) / s)
    ok = spread(lin) <= 1.2 and spread(lg) <= 2.0 and max(rel) <= 5e-3
    verdict(4, "eigenvalue scaling", ok,
            f"n=3 eps/eta spread {spread(lin):.4f} (<= 1.2), n=2 eps|log eta| spread "
            f"{spread(lg):.4f} (<= 2), grid vs shooting {max(rel):.1e} (<= 5e-3)")


def test_5_competitor_bounds(verdict):
    etas = [0.1, 0.05, 0.01]
    spreads = {}
    consistent = True
    for n, m in ((2, 0), (3, 1), (4, 2)):
        t = eigen_table(n, etas, m=m)
        spreads[(n, m)] = spread(t[:, 2] * np.abs(np.log(t[:, 0])))
        if m == 0:
            consistent &= bool(np.all(t[:, 2] >= t[:, 1]))
    t = eigen_table(4, etas, m=1)
    spreads[(4, 1)] = spread(t[:, 4])
    for n in (3, 4):
        t = eigen_table(n, etas)
        consistent &= bool(np.all(t[:, 2] >= t[:, 1]))
    ok = max(spreads.values()) < 3.0 and consistent
    detail = ", ".join(f"(n={n},m={m}) {s:.3f}" for (n, m), s in spreads.items())
    verdict(5, "competitor bounds", ok, f"spreads {detail} (< 3); eps_ub >= eps: {consistent}")


def test_6_geometry(verdict, rng):
    violations = 0
    for n, m, eta in ((2, 0, 0.1), (3, 0, 0.05), (3, 1, 0.2), (4, 1, 0.1), (4, 2, 0.05)):
        D = ConeDomain(n, m, eta)
        X, T = sample_domain(D, 100_000, rng)
        *_, ok = sandwich_check_many(X, T, D)
        violations += int(np.sum(~ok))
    D = ConeDomain(3, 1, 0.1)
    X, T = sample_domain(D, 1000, rng, radius=2 / 3, min_dist=0.02)
    bad = 0
    for x, t in zip(X, T):
        c = build_harnack_chain(ParaPoint(x, t), D, 0.02)
        good = abs(c.points[-1].t) < 0.99
        if c.length:
            yn = c.y_norms(D)
            good &= bool(np.all(c.growth_factors >= 1.1) and np.all(yn[1:] <= 1.5 * yn[:-1]))
        bad += int(not good)
    verdict(6, "geometry suite", violations == 0 and bad == 0,
            f"{violations} sandwich violations in 5 x 1e5 points, {bad} bad chains of 1000")


def test_7_extinction_rates(verdict):
    f2 = fit_rate(radial_benchmark(2).history, "sqrtlog_2d", window=BENCH_WINDOW)
    f3 = fit_rate(radial_benchmark(3).history, "loglog_nd", window=BENCH_WINDOW)
    s = np.geomspace(1e-8, 1e-2, 300)
    syn2 = fit_samples(s, radial_rate(s, 2), "sqrtlog_2d").slope + 1 / np.sqrt(2)
    syn3 = fit_samples(s, radial_rate(s, 3), "loglog_nd").slope + 1.0
    ok = (-1.05 <= f2.slope <= -0.35 and -1.5 <= f3.slope <= -0.5
          and abs(syn2) <= 0.02 and abs(syn3) <= 0.02)
    verdict(7, "radial extinction rates", ok,
            f"n=2 slope {f2.slope:.4f} in [-1.05,-0.35] ({f2.samples} samples), n=3 slope "
            f"{f3.slope:.4f} in [-1.5,-0.5], synthetic errors {syn2:.1e}, {syn3:.1e}")


def test_8_envelope_inclusion(verdict):
    e2 = check_envelope(radial_benchmark(2).history, "planar", delta=0.1, window=BENCH_WINDOW)
    e3 = check_envelope(radial_benchmark(3).history, "higher_dim", delta=0.1, n=3, window=BENCH_WINDOW)
    s = np.geomspace(1e-8, 1e-2, 300)
    controls = [check_envelope(synthetic_history(kind, s), env, delta=0.1, n=3).ok
                for kind in ("sqrt", "linear") for env in ("planar", "higher_dim")]
    finite = all(np.isfinite([e.c1, e.C1]).all() and e.c1 > 0 for e in (e2, e3))
    ok = e2.ok and e3.ok and finite and not any(controls)
    verdict(8, "envelope inclusion", ok,
            f"planar ok={e2.ok} (c1={e2.c1:.3g}, C1={e2.C1:.3g}), higher_dim ok={e3.ok} "
            f"(c1={e3.c1:.3g}, C1={e3.C1:.3g}), negative controls passing: {sum(controls)}/4")


def test_9_almost_positivity(verdict):
    lows, nus = [], []
    for n, m, eta in ((2, 0, 0.1), (3, 1, 0.2)):
        nu, _ = calibrated_floor(n, m, h=0.02)
        run = almost_positivity_run(n, m, eta, nu, h=0.01)
        lows.append(run.min_value)
        nus.append(nu)
    verdict(9, "almost positivity", min(lows) >= -1e-8,
            f"floors nu = {nus[0]:.3g}, {nus[1]:.3g}; min u on the half cylinder "
            f"{min(lows):.2e} (>= -1e-8)")


def test_10_quadrature_integrity(verdict):
    mass = max(abs(gaussian_mass(d) - 1.0) for d in (1, 2, 3))
    rng = np.random.default_rng(2024)
    profiles = [BumpProfile.random(2, rng) for _ in range(100)]
    held = sum(log_sobolev_check(p, slack=1e-8)[2] for p in profiles)
    unit = sum(not log_sobolev_check(p, constant=1.0, slack=1e-8)[2] for p in profiles)
    verdict(10, "quadrature integrity", mass <= 1e-10 and held == 100,
            f"mass error {mass:.1e} (<= 1e-10), inequality held on {held}/100 profiles "
            f"(constant 4; {unit}/100 violate constant 1)")
