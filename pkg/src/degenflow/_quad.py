"""Quadrature rules and Richardson extrapolation shared by the numerical modules."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(edges, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on the panels ``[edges[i], edges[i+1]]``.

    ``edges`` may carry leading batch dimensions; the panel axis is the last
    one. Returned nodes and weights have shape ``(*batch, npanels * order)``.
    Zero-width panels are allowed and contribute nothing.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    a = edges[..., :-1, None]
    b = edges[..., 1:, None]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * x
    weights = half * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def geometric_edges(length: float, levels: int, ratio: float = 0.5) -> np.ndarray:
    """Panel edges ``0, length*ratio**levels, ..., length*ratio, length``."""
    powers = ratio ** np.arange(levels, -1, -1, dtype=float)
    return np.concatenate(([0.0], length * powers))


def integrate(fun, a: float, b: float, order: int = 20, panels: int = 1) -> complex:
    """Fixed composite Gauss-Legendre integral of a vectorised ``fun`` on [a, b]."""
    nodes, weights = panel_rule(np.linspace(a, b, panels + 1), order)
    return np.sum(weights * fun(nodes))


def richardson(values, ratio: float = 2.0):
    """Extrapolate ``D(h_j)``, ``h_j = h_0 / ratio**j``, to ``h -> 0``.

    Assumes an error expansion in integer powers of ``h``. Returns
    ``(estimate, error_estimate, table)``; the estimate is the tableau entry
    whose local error (difference to its two neighbours) is smallest, in the
    spirit of Ridders' scheme.
    """
    values = np.asarray(values)
    n = len(values)
    if n == 0:
        raise ValueError("richardson needs at least one value")
    table = np.zeros((n, n), dtype=values.dtype)
    table[:, 0] = values
    best = values[-1]
    err = np.inf if n == 1 else abs(values[-1] - values[-2])
    for j in range(1, n):
        fac = ratio
        for i in range(1, j + 1):
            table[j, i] = table[j, i - 1] + (table[j, i - 1] - table[j - 1, i - 1]) / (fac - 1.0)
            fac *= ratio
            e = max(abs(table[j, i] - table[j, i - 1]), abs(table[j, i] - table[j - 1, i - 1]))
            if e <= err:
                err = e
                best = table[j, i]
    return best, float(err), table


def loglog_fit(x, y) -> tuple[float, float, float]:
    """Least-squares line through ``(log x, log y)``: (slope, intercept, rms residual)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if len(lx) < 2:
        raise ValueError("need at least two points for a log-log fit")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid**2)))
