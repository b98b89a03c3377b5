"""Contact-set metrics: inradius and circumradius about an anchor, and volume."""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..errors import InputError
from ..quadrature import sphere_area


@dataclass(frozen=True)
class ContactMetrics:
    inradius: float
    circumradius: float
    volume: float
    empty: bool
    resolution: float    # local grid spacing at the outer crossing


def _crossing(r, u, thr, j):
    """Sub-grid radius where the profile leaves the contact set before node ``j``.

    ``j`` is the first positive node after a contact node. Near a free
    boundary ``u`` grows quadratically, so ``sqrt(u)`` is extrapolated
    linearly from nodes ``j`` and ``j+1``; the estimate is clipped to the
    bracketing interval. Without a usable second node the threshold
    crossing is interpolated linearly.
    """
    lo, hi = r[j - 1], r[j]
    if j + 1 < len(r) and u[j + 1] > u[j] > 0:
        s1, s2 = np.sqrt(u[j]), np.sqrt(u[j + 1])
        est = r[j] - s1 * (r[j + 1] - r[j]) / (s2 - s1)
    else:
        du = u[j] - u[j - 1]
        est = lo + (thr[j] - u[j - 1]) / du * (hi - lo) if du > 0 else lo
    return float(min(max(est, lo), hi))


def ray_radii(r, u, thr):
    """Inner and outer contact radii along one ray starting at the anchor.

    Returns ``(inradius, circumradius, outer_index)`` or ``None`` when the ray
    meets no contact node.
    """
    contact = u < thr
    if not contact.any():
        return None
    if not contact[0]:
        inner = 0.0
    else:
        free = np.flatnonzero(~contact)
        inner = float(r[-1]) if free.size == 0 else _crossing(r, u, thr, free[0])
    k = np.flatnonzero(contact)[-1]
    outer = float(r[-1]) if k == len(r) - 1 else _crossing(r, u, thr, k + 1)
    return inner, outer, min(k + 1, len(r) - 1)


def radial_volumes(r, n):
    rh = 0.5 * (r[1:] + r[:-1])
    left = np.concatenate([[0.0], rh])
    right = np.concatenate([rh, [r[-1]]])
    return sphere_area(n) * (right ** n - left ** n) / n


def _spacing(r):
    return np.concatenate([np.diff(r), [r[-1] - r[-2]]])


def radial_metrics(r, u, n, factor=1e-3, volumes=None, spacing=None):
    spacing = _spacing(r) if spacing is None else spacing
    thr = factor * spacing ** 2
    res = ray_radii(r, u, thr)
    if res is None:
        return ContactMetrics(0.0, 0.0, 0.0, True, 0.0)
    vol = radial_volumes(r, n) if volumes is None else volumes
    inner, outer, k = res
    return ContactMetrics(inner, outer, float(vol[u < thr].sum()), False, float(spacing[k]))


def extract_contact_metrics(u, anchor=None, threshold_factor=1e-3, rays=720):
    """Contact set ``{u < threshold_factor * h_local^2}`` measured from ``anchor``.

    Works for radial fields (anchor is the origin), 1-d Cartesian fields
    (two rays) and 2-d Cartesian fields (``rays`` directions, bilinear
    sampling at half-cell steps).
    """
    if u.radial:
        if anchor is not None and np.any(np.asarray(anchor) != 0):
            raise InputError("radial fields are anchored at the origin")
        return radial_metrics(u.coords, u.values, u.n, threshold_factor)
    h = u.h
    thr_val = threshold_factor * h * h
    vals = u.values
    axes = u.axes()
    if vals.ndim == 1:
        x = axes[0]
        a = 0.0 if anchor is None else float(np.atleast_1d(anchor)[0])
        if not x[0] <= a <= x[-1]:
            raise InputError("anchor outside the grid")
        results = []
        for sign in (1.0, -1.0):
            sel = (x - a) * sign >= -1e-12 * h
            r = np.abs(x[sel] - a)
            order = np.argsort(r)
            res = ray_radii(r[order], vals[sel][order], np.full(order.size, thr_val))
            if res is not None:
                results.append(res)
        if not results:
            return ContactMetrics(0.0, 0.0, 0.0, True, 0.0)
        count = np.count_nonzero(vals < thr_val)
        return ContactMetrics(min(r[0] for r in results), max(r[1] for r in results),
                              count * h, False, h)
    if not np.any(vals < thr_val):
        return ContactMetrics(0.0, 0.0, 0.0, True, 0.0)
    a = np.zeros(2) if anchor is None else np.asarray(anchor, dtype=float)
    interp = RegularGridInterpolator(axes, vals, method="linear", bounds_error=False,
                                     fill_value=None)
    lo = np.array([axes[0][0], axes[1][0]])
    hi = np.array([axes[0][-1], axes[1][-1]])
    if np.any(a < lo) or np.any(a > hi):
        raise InputError("anchor outside the grid")
    theta = np.linspace(0.0, 2 * np.pi, rays, endpoint=False)
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    # longest ray that stays inside the box, per direction
    with np.errstate(divide="ignore", invalid="ignore"):
        lim = np.where(dirs > 0, (hi - a) / dirs, np.where(dirs < 0, (lo - a) / dirs, np.inf))
    reach = lim.min(axis=1)
    step = 0.5 * h
    nsteps = int(np.ceil(reach.max() / step)) + 1
    s = step * np.arange(nsteps)
    inner, outer = np.inf, 0.0
    pts = a + s[None, :, None] * dirs[:, None, :]
    prof = interp(pts.reshape(-1, 2)).reshape(rays, nsteps)
    thr = np.full(nsteps, thr_val)
    for k in range(rays):
        m = s <= reach[k] + 1e-12
        res = ray_radii(s[m], prof[k, m], thr[m])
        if res is None:
            inner = 0.0
            continue
        inner = min(inner, res[0])
        outer = max(outer, res[1])
    count = np.count_nonzero(vals < thr_val)
    return ContactMetrics(float(inner), float(outer), count * h * h, False, h)
