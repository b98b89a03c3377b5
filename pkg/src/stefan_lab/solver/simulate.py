"""Time integration until the contact set disappears."""

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import FitError, InputError, NumericError
from ..fields import read_csv_table
from .problem import ObstacleProblem

HISTORY_COLUMNS = ("t", "inradius", "circumradius", "volume")


@dataclass
class ContactSetHistory:
    """Per-step contact-set metrics and the extinction time (``None`` if never reached)."""

    t: np.ndarray
    inradius: np.ndarray
    circumradius: np.ndarray
    volume: np.ndarray
    t_star: float = None
    resolution: np.ndarray = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        n = self.t.size
        for name in ("inradius", "circumradius", "volume"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise InputError(f"{name} must have {n} entries")
            setattr(self, name, arr)
        if self.resolution is not None:
            self.resolution = np.asarray(self.resolution, dtype=float)

    def __len__(self):
        return self.t.size

    @property
    def s(self):
        """Time to extinction ``T* - t``."""
        if self.t_star is None:
            raise FitError("history has no extinction time")
        return self.t_star - self.t

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(HISTORY_COLUMNS)
            for row in zip(self.t, self.inradius, self.circumradius, self.volume):
                w.writerow([format(float(v), ".17g") for v in row])

    @classmethod
    def from_csv(cls, path, t_star=None):
        header, data = read_csv_table(path)
        if tuple(header[:4]) != HISTORY_COLUMNS:
            raise InputError(f"{path}: expected columns {HISTORY_COLUMNS}")
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3], t_star)


@dataclass
class SimulationResult:
    snapshots: list
    history: ContactSetHistory
    stats: dict = field(default_factory=dict)

    @property
    def t_star(self):
        return self.history.t_star


def _rel_change(old, new):
    return abs(old - new) / old if old > 0 else 0.0


def simulate(cfg, keep_snapshots=True, progress=None):
    """Advance ``cfg`` until extinction, ``max_time`` or ``max_steps``.

    Extinction is the first step whose contact set is empty; its time is
    refined by bisection on the last step size. With ``time.adaptive`` the
    step is chosen so the circumradius changes by about
    ``time.target_change`` per step.
    """
    prob = ObstacleProblem(cfg)
    timings = {"setup": 0.0, "steps": 0.0}
    t0 = time.perf_counter()
    u = prob.u0.copy()
    t = 0.0
    m = prob.metrics(u)
    rows = [(t, m.inradius, m.circumradius, m.volume, m.resolution)]
    snaps = [prob.field(u, t)] if keep_snapshots else []
    had_contact = not m.empty
    timings["setup"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    dt = cfg.dt
    steps = rejected = sweeps = asi = 0
    t_star = None
    max_res = 0.0
    while t < cfg.max_time - 1e-15 and steps < cfg.max_steps:
        dt = min(dt, cfg.max_time - t)
        un, info = prob.step(u, t + dt, dt)
        mn = prob.metrics(un)
        if had_contact and mn.empty:
            t_star = _bisect_extinction(prob, u, t, dt)
            break
        rel = _rel_change(m.circumradius, mn.circumradius)
        if cfg.time_adaptive and rel > 2 * cfg.time_target_change and dt > cfg.time_dt_min:
            dt = max(0.5 * dt, cfg.time_dt_min)
            rejected += 1
            continue
        scale = max(np.max(u), np.max(np.abs(prob.boundary_values(t + dt))), 1e-300)
        if np.max(un) > 10.0 * scale:
            raise NumericError(f"instability at t={t + dt:.6g}: max|u| jumped "
                               f"from {np.max(u):.3e} to {np.max(un):.3e}")
        u, m, t = un, mn, t + dt
        steps += 1
        sweeps += info.sweeps
        asi += info.active_set_iterations
        max_res = max(max_res, info.residual)
        had_contact = had_contact or not m.empty
        rows.append((t, m.inradius, m.circumradius, m.volume, m.resolution))
        if keep_snapshots and steps % cfg.snapshot_stride == 0:
            snaps.append(prob.field(u, t))
        if progress is not None:
            progress(steps, t, m)
        if cfg.time_adaptive:
            factor = cfg.time_target_change / max(rel, 1e-12)
            dt = min(dt * min(2.0, max(0.5, factor)), cfg.time_dt_max)
            dt = max(dt, cfg.time_dt_min)
    if keep_snapshots and (not snaps or snaps[-1].t != t):
        snaps.append(prob.field(u, t))
    timings["steps"] = time.perf_counter() - t0
    arr = np.array(rows)
    hist = ContactSetHistory(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], t_star, arr[:, 4])
    stats = {"steps": steps, "rejected_steps": rejected, "psor_sweeps": sweeps,
             "active_set_iterations": asi, "max_complementarity_residual": max_res,
             "nodes": int(np.prod(prob.disc.shape)), "timings": timings}
    return SimulationResult(snaps, hist, stats)


def _bisect_extinction(prob, u, t, dt, iterations=60):
    """Smallest step from ``(u, t)`` that empties the contact set, to rounding."""
    lo, hi = 0.0, dt
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        um, _ = prob.step(u, t + mid, mid)
        if prob.metrics(um).empty:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * max(t, 1.0):
            break
    return t + hi
