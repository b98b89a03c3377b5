import numpy as np
import pytest

from stefan_lab.errors import DomainError
from stefan_lab.geometry import (accessibility_check, build_harnack_chain, chain_length_bound,
                                 cone_boundary_dist, cone_boundary_dist_many, para_dist,
                                 para_dist_many, sample_domain, sandwich_check, sandwich_check_many)
from stefan_lab.types import ConeDomain, ParaPoint


def brute_force_dist(a, b, t, eta, m):
    """Distance to the complement by dense enumeration of the two boundary sheets."""
    # time sheet: complement {|y| <= eta sqrt|s|}; keep |xbar|, shrink |y|
    s = t - np.concatenate([np.linspace(0.0, 1e-3, 20001), np.linspace(1e-3, 4.0, 400001)])
    d = np.sqrt(np.maximum(b - eta * np.sqrt(np.abs(s)), 0.0) ** 2 + np.abs(t - s)).min()
    if m:
        ap = np.linspace(0.0, a + b / eta + 1.0, 2_000_001)
        d = min(d, np.sqrt((a - ap) ** 2 + (b - eta * ap) ** 2).min())
    return d


def test_para_dist_examples():
    p = ParaPoint([1.0, 2.0], -1.0)
    assert para_dist(p, p) == 0.0
    assert para_dist(ParaPoint([3.0, 4.0], 0.5), ParaPoint([0.0, 0.0], 0.5)) == 5.0
    assert para_dist(ParaPoint([1.0, 1.0], -5.0), ParaPoint([1.0, 1.0], -1.0)) == 2.0


def test_para_dist_triangle_inequality(rng):
    X, Y, Z = (rng.normal(size=(10_000, 3)) for _ in range(3))
    T, S, R = (rng.normal(size=10_000) for _ in range(3))
    lhs = para_dist_many(X, T, Z, R)
    rhs = para_dist_many(X, T, Y, S) + para_dist_many(Y, S, Z, R)
    assert np.all(lhs <= rhs + 1e-12)


@pytest.mark.parametrize("n,m,eta", [(2, 0, 0.1), (3, 0, 0.2), (3, 1, 0.1), (4, 1, 0.05), (4, 2, 0.2)])
def test_boundary_distance_matches_enumeration(n, m, eta, rng):
    D = ConeDomain(n, m, eta)
    X, T = sample_domain(D, 6, rng)
    a, b = D.split(X)
    got = cone_boundary_dist_many(X, T, D)
    for k in range(len(T)):
        assert got[k] == pytest.approx(brute_force_dist(a[k], b[k], T[k], eta, m), abs=2e-6)


def test_boundary_point_is_rejected():
    D = ConeDomain(3, 1, 0.2)
    with pytest.raises(DomainError):
        cone_boundary_dist(ParaPoint([1.0, 0.2, 0.0], -0.01), D)


@pytest.mark.parametrize("m", [0, 1])
def test_distance_scaling(m, rng):
    D = ConeDomain(3, m, 0.15)
    X, T = sample_domain(D, 200, rng)
    d1 = cone_boundary_dist_many(X, T, D)
    for lam in (0.3, 2.5):
        d2 = cone_boundary_dist_many(lam * X, lam * lam * T, D)
        np.testing.assert_allclose(d2, lam * d1, rtol=0, atol=1e-9 * max(lam, 1))


def test_sandwich_small_aperture_limit():
    for eta in (1e-2, 1e-4, 1e-6):
        lo, d, up, ok = sandwich_check(ParaPoint([0.0, 1.0], -0.01), ConeDomain(2, 0, eta))
        assert ok
        assert lo / up == pytest.approx(1 / (1 + eta), rel=1e-12)


@pytest.mark.parametrize("n,m,eta", [(2, 0, 0.1), (3, 1, 0.2), (4, 2, 0.05)])
def test_sandwich_holds(n, m, eta, rng):
    D = ConeDomain(n, m, eta)
    X, T = sample_domain(D, 20_000, rng)
    *_, ok = sandwich_check_many(X, T, D)
    assert ok.all()


def test_chain_length_bound_example():
    # smallest k with 1.1^k * 0.01 > 3/8, by direct evaluation
    k = chain_length_bound(0.01)
    assert 1.1 ** k * 0.01 > 0.375 >= 1.1 ** (k - 1) * 0.01
    assert k == 39


def test_chain_of_length_zero():
    D = ConeDomain(2, 0, 0.1)
    chain = build_harnack_chain(ParaPoint([0.0, 0.4], -0.1), D, 0.01)
    assert chain.length == 0


def test_chain_properties(rng):
    D = ConeDomain(3, 1, 0.1)
    X, T = sample_domain(D, 200, rng, radius=2 / 3, min_dist=0.02)
    for x, t in zip(X, T):
        c = build_harnack_chain(ParaPoint(x, t), D, 0.02)
        assert c.length <= chain_length_bound(0.02)
        if c.length:
            assert np.all(c.growth_factors >= 1.1)
            yn = c.y_norms(D)
            assert np.all(yn[1:] <= 1.5 * yn[:-1])
            assert all(c.cylinder_inside)
            for p, q in zip(c.points[:-1], c.points[1:]):
                d = cone_boundary_dist(p, D)
                assert np.sum((q.x - p.x) ** 2) < d * d / 2 and 0 < p.t - q.t < d * d / 2
        assert abs(c.points[-1].t) < 0.99


def test_chain_precondition():
    D = ConeDomain(2, 0, 0.1)
    with pytest.raises(DomainError):
        build_harnack_chain(ParaPoint([0.0, 0.05], -0.1), D, 0.02)  # too close to the boundary
    with pytest.raises(DomainError):
        build_harnack_chain(ParaPoint([0.0, 0.7], -0.1), D, 0.02)  # outside Q_{2/3}


@pytest.mark.parametrize("eta", [0.05, 0.1, 0.2])
def test_accessibility(eta):
    rep = accessibility_check(ConeDomain(3, 1, eta), 0.1, 300, seed=1, boundary_samples=2000)
    assert rep.chain_failures == 0
    assert rep.min_intermediate_ratio >= 11 / 20 - 1e-12
    assert rep.min_final_ratio >= 1.0 - 1e-12
    assert rep.cylinders_inside
    assert rep.c0_empirical > 0.05
