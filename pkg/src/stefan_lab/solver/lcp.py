"""Linear complementarity solver: ``x >= 0``, ``Mx - b >= 0``, ``x.(Mx - b) = 0``.

Projected SOR (lexicographic Gauss-Seidel order) does the final sweeps. For
large systems it is preceded by a primal-dual active-set iteration, which
solves the problem exactly for M-matrices in a handful of sparse solves and
leaves PSOR only a polishing pass.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numba import njit

from ..errors import ConvergenceError


@dataclass
class LCPInfo:
    active_set_iterations: int
    sweeps: int
    residual: float
    last_update: float


@njit(cache=True)
def _psor(indptr, indices, data, diag, b, x, omega, tol, max_sweeps):
    n = b.size
    delta = 0.0
    for sweep in range(max_sweeps):
        delta = 0.0
        for i in range(n):
            s = b[i]
            for k in range(indptr[i], indptr[i + 1]):
                j = indices[k]
                if j != i:
                    s -= data[k] * x[j]
            new = x[i] + omega * (s / diag[i] - x[i])
            if new < 0.0:
                new = 0.0
            d = abs(new - x[i])
            if d > delta:
                delta = d
            x[i] = new
        if delta <= tol:
            return sweep + 1, delta
    return max_sweeps, delta


def psor(M, b, x0, omega=1.8, tol=1e-12, max_sweeps=100000):
    """Projected SOR; returns ``(x, sweeps, last_update)``."""
    M = sp.csr_matrix(M)
    x = np.maximum(np.array(x0, dtype=float), 0.0)
    sweeps, delta = _psor(M.indptr, M.indices, M.data, M.diagonal(), np.asarray(b, float),
                          x, float(omega), float(tol), int(max_sweeps))
    return x, int(sweeps), float(delta)


def active_set(M, b, x0, max_iter=100):
    """Primal-dual active-set iteration. Returns ``(x, iterations, converged)``."""
    M = sp.csr_matrix(M)
    x = np.maximum(np.asarray(x0, dtype=float), 0.0)
    active = None
    for it in range(1, max_iter + 1):
        w = M @ x - b
        new_active = (x - w) <= 0.0
        if active is not None and np.array_equal(new_active, active):
            return x, it - 1, True
        active = new_active
        free = ~active
        x = np.zeros_like(x)
        if free.any():
            sub = M[free][:, free].tocsc()
            x[free] = spla.spsolve(sub, b[free]) if sub.shape[0] > 1 else b[free] / sub.toarray()[0, 0]
    return np.maximum(x, 0.0), max_iter, False


def complementarity_residual(M, b, x, weights=None):
    """``max |min(x, (Mx - b)/weights)|``."""
    w = M @ x - b
    if weights is not None:
        w = w / weights
    return float(np.max(np.abs(np.minimum(x, w)))) if x.size else 0.0


def solve_lcp(M, b, x0, *, omega=1.8, tol=1e-12, max_sweeps=100000, warm_start="active_set",
              weights=None):
    """Solve the LCP; raises :class:`ConvergenceError` when PSOR stalls."""
    iters = 0
    x = np.maximum(np.asarray(x0, dtype=float), 0.0)
    if warm_start == "active_set" and x.size:
        x, iters, _ = active_set(M, b, x)
    x, sweeps, delta = psor(M, b, x, omega, tol, max_sweeps)
    res = complementarity_residual(M, b, x, weights)
    if delta > tol:
        raise ConvergenceError(
            f"PSOR did not converge in {max_sweeps} sweeps (last update {delta:.3e}, "
            f"complementarity residual {res:.3e})", residual=res, iterations=sweeps)
    return x, LCPInfo(iters, sweeps, res, delta)
