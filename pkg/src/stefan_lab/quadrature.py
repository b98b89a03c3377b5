"""Quadrature rules shared by the spectral and frequency modules."""

import numpy as np
from scipy.special import gamma, roots_genlaguerre, roots_hermite, roots_legendre


def sphere_area(n):
    """Surface measure of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * np.pi ** (n / 2) / gamma(n / 2)


def gauss_legendre(a, b, order):
    x, w = roots_legendre(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def panels(breaks, order):
    """Composite Gauss-Legendre rule over consecutive break points."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = roots_legendre(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def graded_breaks(a, b, count, ratio=1.5):
    """Breaks on ``[a, b]`` whose lengths grow geometrically away from ``a``."""
    if count == 1:
        return np.array([a, b])
    lengths = ratio ** np.arange(count)
    cum = np.concatenate([[0.0], np.cumsum(lengths)]) / lengths.sum()
    return a + (b - a) * cum


def hermite_tensor(dim, order):
    """Nodes ``(N, dim)`` and weights for ``int f(y) exp(-|y|^2) dy``."""
    x, w = roots_hermite(order)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wg = np.meshgrid(*([w] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wg], axis=1), axis=1)
    return nodes, weights


def gaussian_expectation_rule(dim, order, scale):
    """Rule for expectations under the centered Gaussian with density
    ``(4 pi scale^2)^(-dim/2) exp(-|x|^2 / (4 scale^2))``.

    Exact for polynomials of degree < 2*order in each variable.
    """
    y, w = hermite_tensor(dim, order)
    return 2.0 * scale * y, w / np.pi ** (dim / 2)


def laguerre(order, alpha):
    """Generalized Gauss-Laguerre rule for ``int_0^inf f(z) z^alpha e^-z dz``."""
    return roots_genlaguerre(order, alpha)


def box_rule(dim, half_width, panels_per_dim, order):
    """Tensor composite Gauss-Legendre rule on ``[-half_width, half_width]^dim``."""
    x, w = panels(np.linspace(-half_width, half_width, panels_per_dim + 1), order)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wg = np.meshgrid(*([w] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wg], axis=1), axis=1)
    return nodes, weights
