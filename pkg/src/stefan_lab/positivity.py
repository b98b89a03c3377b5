"""Heat solves on a cone domain inside the unit cylinder with a negative floor.

The solution is positive on ``{|y| = 1/2}``, zero on the cone boundary and
at least ``-nu`` elsewhere on the parabolic boundary of the unit cylinder.
Symmetry reduces the problem to ``r = |x|`` (no flat directions) or to
``(a, b) = (|xbar|, |y|)`` (one flat direction), solved by implicit Euler on
a masked grid. By linearity the worst case is ``u1 - nu u2`` where ``u1``
carries the unit data on ``{|y| = 1/2}`` and ``u2`` the unit data on the
rest of the cylinder boundary, so the largest admissible floor on a grid is
``min u1/u2`` over the inner half cylinder.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ._validation import check_eta, check_int, check_real
from .errors import InputError

TOP = 0.5  # level |y| = 1/2 where the data is 1


@dataclass
class PositivityRun:
    n: int
    m: int
    eta: float
    nu: float
    h: float
    dt: float
    min_value: float
    ratio_min: float
    nodes_checked: int


class _ReducedGrid:
    def __init__(self, n, m, eta, h):
        self.n, self.m, self.eta, self.h = n, m, eta, h
        k = n - m
        nb = int(round(TOP / h))
        if abs(nb * h - TOP) > 1e-12:
            raise InputError("h must divide 1/2")
        self.b = h * np.arange(nb + 1)
        self.a = h * np.arange(int(round(1.0 / h)) + 1) if m else np.zeros(1)
        A, B = np.meshgrid(self.a, self.b, indexing="ij")
        self.A, self.B = A.ravel(), B.ravel()
        self.shape = A.shape
        self.L = self._laplacian(k)

    def _laplacian(self, k):
        na, nb = self.shape
        h = self.h
        idx = np.arange(na * nb).reshape(na, nb)
        rows, cols, vals = [], [], []
        # |y| direction in the measure b^(k-1) db
        j = np.arange(1, nb - 1)
        bj = self.b[j]
        up = ((bj + h / 2) / bj) ** (k - 1) / h ** 2
        dn = ((bj - h / 2) / bj) ** (k - 1) / h ** 2
        for i in range(na):
            rows += [idx[i, j]] * 3
            cols += [idx[i, j + 1], idx[i, j - 1], idx[i, j]]
            vals += [up, dn, -(up + dn)]
        if self.m:
            # xbar direction; even reflection at a = 0 (m = 1)
            c = np.full(nb, 1.0 / h ** 2)
            rows += [idx[0], idx[0]]
            cols += [idx[1], idx[0]]
            vals += [2 * c, -2 * c]
            for i in range(1, na - 1):
                rows += [idx[i]] * 3
                cols += [idx[i + 1], idx[i - 1], idx[i]]
                vals += [c, c, -2 * c]
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        return sp.csr_matrix((vals, (rows, cols)), shape=(na * nb, na * nb))

    def classify(self, t):
        """Interior mask and boundary data labels at time ``t``.

        Labels: 0 cone boundary, 1 level set ``|y| = 1/2``, 2 outside the unit ball.
        """
        A, B, eta = self.A, self.B, self.eta
        in_cone = B > eta * np.sqrt(abs(t))
        if self.m:
            in_cone &= B > eta * A
        in_ball = A ** 2 + B ** 2 < 1.0 - 1e-12
        interior = in_cone & in_ball & (B < TOP - 1e-12)
        label = np.zeros(A.size, dtype=int)
        label[B >= TOP - 1e-12] = 1
        label[~in_ball] = 2
        return interior, label

    def check_mask(self, interior):
        return interior & (self.A ** 2 + self.B ** 2 < 0.25)


def _solve(grid, dt, data):
    """Implicit Euler from t = -1 to 0 for several boundary-data columns.

    ``data`` maps labels (0, 1, 2) and the initial value to per-column
    values: ``data = {"top": [...], "outer": [...], "initial": [...]}``.
    Yields ``(t, interior, U)`` after each step.
    """
    steps = int(round(1.0 / dt))
    top = np.asarray(data["top"], dtype=float)
    outer = np.asarray(data["outer"], dtype=float)
    init = np.asarray(data["initial"], dtype=float)
    ncol = top.size
    interior, label = grid.classify(-1.0)
    U = np.zeros((grid.A.size, ncol))
    U[interior] = init
    for step in range(1, steps + 1):
        t = -1.0 + step * dt
        interior, label = grid.classify(t)
        g = np.zeros((grid.A.size, ncol))
        g[label == 1] = top
        g[label == 2] = outer
        I = np.flatnonzero(interior)
        Bd = np.flatnonzero(~interior)
        L = grid.L
        LII = L[I][:, I]
        LIB = L[I][:, Bd]
        M = sp.identity(I.size, format="csc") - dt * LII.tocsc()
        rhs = U[I] + dt * (LIB @ g[Bd])
        new = g.copy()
        new[I] = splu(M).solve(rhs)
        U = new
        yield t, interior, U


def calibrate_floor(n, m, eta, h=0.01, dt=None):
    """``min u1/u2`` over the inner half cylinder: the largest floor keeping u >= 0 on this grid."""
    n = check_int(n, "n", low=2)
    m = check_int(m, "m", low=0, high=1)
    if m == 1 and n < 3:
        raise InputError("one flat direction needs n >= 3")
    eta = check_eta(eta)
    dt = dt or h / 4
    grid = _ReducedGrid(n, m, eta, h)
    best = np.inf
    for t, interior, U in _solve(grid, dt, {"top": [1.0, 0.0], "outer": [0.0, 1.0],
                                            "initial": [0.0, 1.0]}):
        if t < -0.25 - 1e-12:
            continue
        mask = grid.check_mask(interior)
        u1, u2 = U[mask, 0], U[mask, 1]
        pos = u2 > 0
        if pos.any():
            best = min(best, float(np.min(u1[pos] / u2[pos])))
    return best


def almost_positivity_run(n, m, eta, nu, h=0.01, dt=None):
    """Solve with data 1 on ``{|y| = 1/2}``, 0 on the cone, ``-nu`` elsewhere; report the
    minimum over the cone domain inside ``Q_{1/2}``."""
    n = check_int(n, "n", low=2)
    m = check_int(m, "m", low=0, high=1)
    eta = check_eta(eta)
    nu = check_real(nu, "nu", low=0.0)
    dt = dt or h / 4
    grid = _ReducedGrid(n, m, eta, h)
    low, count = np.inf, 0
    for t, interior, U in _solve(grid, dt, {"top": [1.0], "outer": [-nu], "initial": [-nu]}):
        if t < -0.25 - 1e-12:
            continue
        mask = grid.check_mask(interior)
        if mask.any():
            low = min(low, float(U[mask, 0].min()))
            count += int(mask.sum())
    return PositivityRun(n, m, eta, nu, h, dt, low, np.nan, count)


def calibrated_floor(n, m, etas=(0.05, 0.1, 0.2), h=0.01, dt=None, safety=0.5):
    """Floor depending only on ``(n, m)``: ``safety * min`` of the calibrated ratios over ``etas``."""
    ratios = {eta: calibrate_floor(n, m, eta, h, dt) for eta in etas}
    return safety * min(ratios.values()), ratios
