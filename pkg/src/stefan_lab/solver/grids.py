"""Grids and discrete Laplacians for the three solver modes.

Every discretization is written as ``K u`` with ``K`` symmetric positive
semidefinite on the unknowns and row weights ``V``, so that ``K u / V``
approximates ``-Laplacian(u)``. In radial mode this is a finite-volume form
(``V`` are control volumes in the measure ``r^(n-1) dr``, no flux at r = 0);
on uniform grids it coincides with the ghost-node symmetric scheme.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError
from ..quadrature import sphere_area


def graded_mesh(L, h, r_min, ratio):
    """Nodes ``0 = r_0 < ... < r_N = L``.

    Uniform spacing ``r_min (ratio - 1)`` on ``[0, r_min]``, geometric growth
    by ``ratio`` beyond, capped at ``h``.
    """
    h0 = r_min * (ratio - 1.0)
    core = np.linspace(0.0, r_min, int(round(r_min / h0)) + 1)
    nodes = list(core)
    r = r_min
    while r < L:
        r = r + min(r * (ratio - 1.0), h)
        nodes.append(r)
    r = np.array(nodes)
    r[-1] = L
    if r[-1] - r[-2] < 0.3 * (r[-2] - r[-3]):
        r = np.delete(r, -2)
    return r


@dataclass
class Discretization:
    mode: str
    n: int
    h: float
    axes: list
    shape: tuple
    unknown: np.ndarray      # boolean mask on the full grid (C order)
    V: np.ndarray            # row weights on unknowns
    K: sp.csr_matrix         # unknown-unknown block
    KB: sp.csr_matrix        # -(unknown-boundary block), nonnegative
    spacing: np.ndarray      # local node spacing, full grid
    volume: np.ndarray       # physical measure attached to each node, full grid

    @property
    def radial(self):
        return self.mode == "radial"

    @property
    def n_unknown(self):
        return int(self.unknown.sum())

    def mesh(self):
        """Coordinate arrays broadcast to the full grid shape."""
        if len(self.axes) == 1:
            return [self.axes[0]]
        return list(np.meshgrid(*self.axes, indexing="ij"))


def _radial(cfg):
    n = cfg.n
    if cfg.grid_kind == "graded":
        r = graded_mesh(cfg.L, cfg.h, cfg.grid_r_min, cfg.grid_ratio)
    else:
        N = int(round(cfg.L / cfg.h))
        r = np.linspace(0.0, cfg.L, N + 1)
    rh = 0.5 * (r[1:] + r[:-1])
    left = np.concatenate([[0.0], rh])
    right = np.concatenate([rh, [r[-1]]])
    Vall = (right ** n - left ** n) / n
    F = rh ** (n - 1) / np.diff(r)
    m = len(r) - 1
    diag = F[:m].copy()
    diag[1:] += F[: m - 1]
    K = sp.diags([-F[: m - 1], diag, -F[: m - 1]], [-1, 0, 1], format="csr")
    KB = sp.csr_matrix((np.array([F[m - 1]]), (np.array([m - 1]), np.array([0]))), shape=(m, 1))
    unknown = np.ones(len(r), dtype=bool)
    unknown[-1] = False
    spacing = np.concatenate([np.diff(r), [r[-1] - r[-2]]])
    volume = sphere_area(n) * Vall
    return Discretization("radial", n, float(np.max(np.diff(r))), [r], (len(r),), unknown,
                          Vall[:m], K, KB, spacing, volume)


def _lap1d(N, h):
    """Dirichlet 1-d second-difference matrix for N interior nodes, times -h^2."""
    return sp.diags([-np.ones(N - 1), 2 * np.ones(N), -np.ones(N - 1)], [-1, 0, 1])


def _cartesian(cfg, dim):
    N = int(round(2 * cfg.L / cfg.h))
    if N < 4:
        raise ConfigError("grid too coarse: need at least 4 cells across")
    h = 2 * cfg.L / N
    x = np.linspace(-cfg.L, cfg.L, N + 1)
    inner = N - 1
    T = _lap1d(inner, h)
    if dim == 1:
        K = (T / (h * h)).tocsr()
        unknown = np.zeros(N + 1, dtype=bool)
        unknown[1:-1] = True
        KB = sp.csr_matrix((np.full(2, 1 / h ** 2), ([0, inner - 1], [0, 1])), shape=(inner, 2))
        return Discretization("cartesian1d", 1, h, [x], (N + 1,), unknown, np.ones(inner),
                              K, KB, np.full(N + 1, h), np.full(N + 1, h))
    I = sp.identity(inner)
    K = ((sp.kron(T, I) + sp.kron(I, T)) / (h * h)).tocsr()
    unknown = np.zeros((N + 1, N + 1), dtype=bool)
    unknown[1:-1, 1:-1] = True
    # coupling of interior nodes to the boundary ring
    full = np.arange((N + 1) ** 2).reshape(N + 1, N + 1)
    bnd_ids = full[~unknown]
    bnd_pos = -np.ones((N + 1) ** 2, dtype=int)
    bnd_pos[bnd_ids] = np.arange(bnd_ids.size)
    unk_pos = -np.ones((N + 1) ** 2, dtype=int)
    unk_pos[full[unknown]] = np.arange(inner * inner)
    rows, cols = [], []
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ii, jj = np.nonzero(unknown)
        ni, nj = ii + di, jj + dj
        nb = full[ni, nj]
        hit = bnd_pos[nb] >= 0
        rows.append(unk_pos[full[ii[hit], jj[hit]]])
        cols.append(bnd_pos[nb[hit]])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    KB = sp.csr_matrix((np.full(rows.size, 1 / h ** 2), (rows, cols)),
                       shape=(inner * inner, bnd_ids.size))
    return Discretization("cartesian2d", 2, h, [x, x], (N + 1, N + 1), unknown,
                          np.ones(inner * inner), K, KB, np.full((N + 1, N + 1), h),
                          np.full((N + 1, N + 1), h * h))


def build_discretization(cfg):
    if cfg.mode == "radial":
        return _radial(cfg)
    if cfg.mode == "cartesian1d":
        return _cartesian(cfg, 1)
    return _cartesian(cfg, 2)
