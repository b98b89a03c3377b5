"""Heat equation on the unit cylinder ``B_1 x (-1, 0)`` in the plane.

Used to measure how much of the parabolic boundary must carry data >= 1
for the value at the top center to stay bounded below. The disk is
discretized with the Shortley-Weller stencil (exact boundary crossings),
time with implicit Euler, so the discrete solution operator is monotone.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import j0, j1, jn_zeros
from scipy.sparse.linalg import splu

from .._validation import check_int, check_random_state, check_real
from ..errors import InputError


class DiskHeat:
    """Implicit-Euler heat solver on the unit disk with Dirichlet data on the circle.

    Lateral data is piecewise constant on ``arcs`` equal arcs and on time
    steps; initial data is given per interior node.
    """

    def __init__(self, h=1 / 32, dt=1 / 64, arcs=64):
        self.h = check_real(h, "h", low=0.0, low_open=True)
        self.steps = int(round(1.0 / check_real(dt, "dt", low=0.0, low_open=True)))
        self.dt = 1.0 / self.steps
        self.arcs = check_int(arcs, "arcs", low=1)
        N = int(round(1.0 / h))
        x = -1.0 + h * np.arange(2 * N + 1)
        X, Y = np.meshgrid(x, x, indexing="ij")
        inside = X ** 2 + Y ** 2 < 1.0 - 1e-12
        self.nodes = np.column_stack([X[inside], Y[inside]])
        index = -np.ones(X.shape, dtype=int)
        index[inside] = np.arange(inside.sum())
        self.center = int(index[N, N])
        rows, cols, vals = [], [], []
        brow, barc, bval = [], [], []
        for (i, j), k in zip(np.argwhere(inside), index[inside]):
            for axis in (0, 1):
                dist, nbr, ang = [], [], []
                for sgn in (1, -1):
                    ii, jj = (i + sgn, j) if axis == 0 else (i, j + sgn)
                    if index[ii, jj] >= 0:
                        dist.append(h)
                        nbr.append(index[ii, jj])
                        ang.append(None)
                    else:
                        p = np.array([X[i, j], Y[i, j]])
                        d = np.zeros(2)
                        d[axis] = sgn
                        # crossing of |p + s d| = 1 with s in (0, h]
                        s = -p[axis] * sgn + np.sqrt((p[axis] * sgn) ** 2 + 1.0 - p @ p)
                        q = p + s * d
                        dist.append(s)
                        nbr.append(-1)
                        ang.append(np.arctan2(q[1], q[0]) % (2 * np.pi))
                hp, hm = dist
                cp, cm = 2.0 / (hp * (hp + hm)), 2.0 / (hm * (hp + hm))
                rows.append(k)
                cols.append(k)
                vals.append(-(cp + cm))
                for c, nb, a in ((cp, nbr[0], ang[0]), (cm, nbr[1], ang[1])):
                    if nb >= 0:
                        rows.append(k)
                        cols.append(nb)
                        vals.append(c)
                    else:
                        brow.append(k)
                        barc.append(int(a / (2 * np.pi) * self.arcs) % self.arcs)
                        bval.append(c)
        n = len(self.nodes)
        self.L = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        self.B = sp.csr_matrix((bval, (brow, barc)), shape=(n, self.arcs))
        self._lu = splu((sp.identity(n, format="csc") - self.dt * self.L).tocsc())

    @property
    def size(self):
        return len(self.nodes)

    def element_measures(self):
        """Measures of the bottom elements (one per node) and lateral elements (step x arc)."""
        bottom = np.full(self.size, self.h ** 2)
        lateral = np.full(self.steps * self.arcs, 2 * np.pi / self.arcs * self.dt)
        return bottom, lateral

    def solve(self, initial, lateral):
        """Value at the top center; ``lateral`` has shape ``(steps, arcs)``."""
        u = np.asarray(initial, dtype=float).copy()
        lateral = np.asarray(lateral, dtype=float)
        for k in range(self.steps):
            u = self._lu.solve(u + self.dt * (self.B @ lateral[k]))
        return float(u[self.center])


def disk_initial_value_oracle(terms=50):
    """Exact center value at time 1 for unit initial data and zero lateral data."""
    z = jn_zeros(0, terms)
    return float(np.sum(2.0 / (z * j1(z)) * j0(0.0) * np.exp(-z ** 2)))


@dataclass
class MaxPrincipleReport:
    fractions: np.ndarray
    theta: np.ndarray
    values: np.ndarray = field(repr=False)
    constant_value: float = 1.0
    initial_face_value: float = 0.0
    initial_face_fraction: float = 0.0

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.theta) >= -1e-14))


def quantitative_max_principle_test(fractions=(0.2, 0.4, 0.6, 0.8), trials=20, seed=0,
                                    h=1 / 32, dt=1 / 64, arcs=64):
    """Minimum center value over random data sets covering a fraction of the boundary.

    For each trial a random ordering of the boundary elements is drawn and
    the data is 1 on the shortest prefix reaching each fraction and 0
    elsewhere, so the sets are nested in the fraction and the empirical
    ``theta`` is nondecreasing in it.
    """
    rng = check_random_state(seed)
    fractions = np.sort(np.asarray(fractions, dtype=float))
    if np.any((fractions <= 0) | (fractions >= 1)):
        raise InputError("fractions must lie in (0, 1)")
    solver = DiskHeat(h, dt, arcs)
    bottom, lateral = solver.element_measures()
    meas = np.concatenate([bottom, lateral])
    total = meas.sum()
    values = np.empty((trials, fractions.size))
    for t in range(trials):
        order = rng.permutation(meas.size)
        cum = np.cumsum(meas[order])
        for j, c in enumerate(fractions):
            count = int(np.searchsorted(cum, c * total)) + 1
            on = np.zeros(meas.size)
            on[order[:count]] = 1.0
            values[t, j] = solver.solve(on[:solver.size],
                                        on[solver.size:].reshape(solver.steps, solver.arcs))
    ones = solver.solve(np.ones(solver.size), np.ones((solver.steps, solver.arcs)))
    face = solver.solve(np.ones(solver.size), np.zeros((solver.steps, solver.arcs)))
    return MaxPrincipleReport(fractions, values.min(axis=0), values, ones, face,
                              float(bottom.sum() / total))
