"""Discrete obstacle problem: initial data, boundary data and one implicit step."""

import functools

import numpy as np
import scipy.sparse as sp

from ..errors import InputError
from ..fields import ScalarField
from .config import SolverConfig
from .contact import ContactMetrics, extract_contact_metrics, radial_metrics
from .grids import build_discretization
from .lcp import solve_lcp


def stationary_profile(r, radius, n):
    """Radial steady state with ``Lap u = 1`` outside a ball, ``u = |grad u| = 0`` on it."""
    r = np.asarray(r, dtype=float)
    a = float(radius)
    if a <= 0:
        return r ** 2 / (2 * n)
    rr = np.maximum(r, a)
    if n == 1:
        u = (rr - a) ** 2 / 2
    elif n == 2:
        u = (rr ** 2 - a ** 2) / 4 - a ** 2 / 2 * np.log(rr / a)
    else:
        u = (rr ** 2 - a ** 2) / (2 * n) + a ** n / (n * (n - 2)) * (rr ** (2 - n) - a ** (2 - n))
    return np.where(r <= a, 0.0, u)


class ObstacleProblem:
    """Implicit-Euler complementarity steps for ``u_t - Lap u = -1{u > 0}``, ``u >= 0``.

    Each step solves ``u >= 0``, ``(V + dt K) u - V (u_prev - dt) - dt KB g >= 0``
    with complementarity, where ``g`` holds the Dirichlet values at the new time.
    """

    def __init__(self, cfg):
        if not isinstance(cfg, SolverConfig):
            raise InputError("expected a SolverConfig")
        self.cfg = cfg
        self.disc = build_discretization(cfg)
        self.mesh = self.disc.mesh()
        self.quadratic = self._quadratic()
        self.u0 = self._initial()
        self.g0 = self.u0[~self.disc.unknown]
        self._thr = cfg.threshold_factor * self.disc.spacing ** 2

    # data
    def _quadratic(self):
        cfg = self.cfg
        if cfg.mode == "radial":
            return self.mesh[0] ** 2 / (2 * cfg.n)
        if cfg.mode == "cartesian1d":
            return self.mesh[0] ** 2 / 2
        x1, x2 = self.mesh
        return 0.5 * (cfg.boundary_mu1 * x1 ** 2 + cfg.boundary_mu2 * x2 ** 2)

    def _initial(self):
        cfg = self.cfg
        kind = cfg.init_kind
        if kind == "zero":
            u = np.zeros(self.disc.shape)
        elif kind == "constant":
            u = np.full(self.disc.shape, max(cfg.init_value, 0.0))
        elif kind == "p2_shifted":
            u = np.maximum(self.quadratic - cfg.init_shift, 0.0)
        else:
            u = self._discrete_stationary()
        if cfg.init_noise > 0:
            rng = np.random.default_rng(cfg.seed)
            u = u + cfg.init_noise * rng.random(u.shape) * (u > 0)
        return u

    def _discrete_stationary(self):
        """Exact discrete steady state for the analytic profile's boundary values."""
        cfg, d = self.cfg, self.disc
        if cfg.mode == "radial":
            r = self.mesh[0]
            n = cfg.n
        else:
            r = np.abs(self.mesh[0])
            n = 1
        cont = stationary_profile(r, cfg.init_radius, n)
        g = cont[~d.unknown]
        b = -d.V + d.KB @ g
        x, _ = solve_lcp(d.K, b, cont[d.unknown], omega=cfg.omega, tol=cfg.tol,
                         max_sweeps=cfg.max_sweeps, warm_start="active_set", weights=d.V)
        u = cont.copy()
        u[d.unknown] = x
        return u

    def boundary_values(self, t):
        cfg = self.cfg
        kind = cfg.boundary_kind
        if kind == "fixed":
            return self.g0
        if kind == "scaled":
            return (1.0 + cfg.boundary_kappa * t) * self.g0
        if kind == "additive":
            return self.g0 + cfg.boundary_kappa * t
        return np.full_like(self.g0, cfg.boundary_value)

    # stepping
    @functools.lru_cache(maxsize=8)
    def _matrix(self, dt):
        d = self.disc
        return (sp.diags(d.V) + dt * d.K).tocsr()

    def step(self, u_full, t_new, dt):
        """Advance a full-grid array by ``dt``; returns ``(u_new, LCPInfo)``."""
        cfg, d = self.cfg, self.disc
        prev = np.asarray(u_full)[d.unknown]
        g = self.boundary_values(t_new)
        b = d.V * (prev - dt) + dt * (d.KB @ g)
        x, info = solve_lcp(self._matrix(dt), b, prev, omega=cfg.omega, tol=cfg.tol,
                            max_sweeps=cfg.max_sweeps, warm_start=cfg.warm_start, weights=d.V)
        out = np.empty(d.shape)
        out[d.unknown] = x
        out[~d.unknown] = g
        return out, info

    def metrics(self, u_full):
        d, cfg = self.disc, self.cfg
        if cfg.mode == "radial":
            return radial_metrics(self.mesh[0], u_full, cfg.n, cfg.threshold_factor,
                                  d.volume, d.spacing)
        return extract_contact_metrics(self.field(u_full, 0.0), cfg.anchor or None,
                                       cfg.threshold_factor)

    def field(self, u_full, t):
        d = self.disc
        if d.radial:
            r = self.mesh[0]
            return ScalarField(u_full, d.h, [0.0], t, self.cfg.n, coords=r)
        origin = [ax[0] for ax in d.axes]
        return ScalarField(u_full, d.h, origin, t, self.cfg.n)

    def initial_field(self):
        return self.field(self.u0, 0.0)


@functools.lru_cache(maxsize=16)
def _problem_for(cfg):
    return ObstacleProblem(cfg)


def step_lcp(u_prev, cfg, dt=None):
    """One implicit step from the field ``u_prev`` (time ``u_prev.t``) of size ``cfg.dt``.

    Dirichlet data are those of ``cfg`` at the new time.
    """
    if np.min(u_prev.values) < 0:
        raise InputError("u_prev must be nonnegative")
    prob = _problem_for(cfg)
    if u_prev.shape != prob.disc.shape:
        raise InputError(f"field shape {u_prev.shape} does not match the grid {prob.disc.shape}")
    dt = cfg.dt if dt is None else float(dt)
    u, _ = prob.step(u_prev.values, u_prev.t + dt, dt)
    return prob.field(u, u_prev.t + dt)
