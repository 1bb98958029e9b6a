"""Norms of the mixed spaces: ``H^gamma`` in theta, fractional ``W^{s,2}`` in m.

The squared norm of ``f`` is

    ||f||^2_{s,gamma} = int_0^1 ||f_m||^2 dm
                        + int int ||f_m - f_m'||^2 / |m - m'|^(1 + 2s) dm dm'

with fiber norms ``||g||^2 = sum_k |k|^(2 gamma) |g_hat(k)|^2``.

The double integral is computed along the diagonal distance ``u = |m - m'|``:

    2 int_0^1 u^(-1-2s) G(u) du,    G(u) = int_0^(1-u) ||f_(m+u) - f_m||^2 dm,

with geometrically graded Gauss-Legendre panels in both ``u`` and ``m``
(all singular behaviour sits at ``u = 0`` and ``m = 0``). On the innermost
band ``u < delta`` the local power law ``G(u) ~ C u^c`` is fitted from two
probes and integrated in closed form; ``c <= 2s`` means the seminorm
diverges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._quad import geometric_edges, panel_rule
from .core import CombinedModes, FiberedFunction, NotInSpaceError, ParameterError, SpectralParams


@dataclass(frozen=True)
class NormReport:
    l2_part: float
    seminorm_part: float
    total: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.total))

    def to_dict(self) -> dict:
        return {"l2_part": self.l2_part, "seminorm_part": self.seminorm_part,
                "total": self.total, "diagnostics": dict(self.diagnostics)}


@dataclass(frozen=True)
class HolderConstants:
    pairwise: float  # sup ||f_m - f_m'|| / |m - m'|^(s - 1/2)
    decay: float     # sup ||f_m|| / m^(s - 1/2)


def _mode_weights(kmax: int, gamma: float) -> np.ndarray:
    k = np.abs(np.arange(-kmax, kmax + 1)).astype(float)
    w = k ** (2.0 * gamma)
    w[kmax] = 0.0
    return w


def fiber_norms_sq(coeffs, gamma: float) -> np.ndarray:
    """Squared ``H^gamma`` norms of the rows of a coefficient array."""
    coeffs = np.asarray(coeffs)
    kmax = (coeffs.shape[-1] - 1) // 2
    return np.abs(coeffs) ** 2 @ _mode_weights(kmax, gamma)


def hgamma_fiber_norm(f: FiberedFunction, node: int, gamma: float) -> float:
    """``( sum_{k != 0} |k|^(2 gamma) |f_hat_m(k)|^2 )^(1/2)`` on fiber ``node``."""
    if gamma < 0:
        raise ParameterError("gamma must be nonnegative")
    if not -len(f.grid) <= node < len(f.grid):
        raise IndexError(f"node {node} outside grid of {len(f.grid)} fibers")
    return float(np.sqrt(fiber_norms_sq(f.coeffs[node], gamma)))


def _gap_energy(ev, u, weights_k, m_rel_nodes, m_rel_w):
    """``G(u)`` for a batch of diagonal distances ``u``."""
    length = 1.0 - u
    m = length[:, None] * m_rel_nodes[None, :]
    w = length[:, None] * m_rel_w[None, :]
    diff = ev.evaluate((m + u[:, None]).ravel()) - ev.evaluate(m.ravel())
    sq = (np.abs(diff) ** 2 @ weights_k).reshape(m.shape)
    return np.sum(sq * w, axis=1)


def seminorm(f: FiberedFunction, p: SpectralParams, *, levels: int = 50, order: int = 8,
             divergence_margin: float = 1e-2, overflow: float = 1e12, chunk: int = 16):
    """Double-integral term of the norm; returns ``(value, diagnostics)``."""
    s, gamma = p.s, p.gamma
    if not 0.0 < s < 1.0:
        raise ParameterError("fractional order s must lie in (0, 1)")
    ev = f.evaluator(max(s - 0.5, 1e-3))
    # factor out scalar multiples so the seminorm is homogeneous to rounding
    scale = 1.0
    while isinstance(ev, CombinedModes) and len(ev.terms) == 1:
        coef, ev = ev.terms[0]
        scale *= abs(coef) ** 2
    wk = _mode_weights(f.kmax, gamma)
    m_rel_nodes, m_rel_w = panel_rule(geometric_edges(1.0, levels + 10), order)
    u_edges = geometric_edges(1.0, levels)[1:]
    u_nodes, u_w = panel_rule(u_edges, order)

    gap = np.empty(len(u_nodes))
    for i in range(0, len(u_nodes), chunk):
        sl = slice(i, i + chunk)
        gap[sl] = _gap_energy(ev, u_nodes[sl], wk, m_rel_nodes, m_rel_w)
    body = 2.0 * np.sum(u_w * u_nodes ** (-1.0 - 2.0 * s) * gap)

    delta = u_edges[0]
    probes = _gap_energy(ev, np.array([delta, 2.0 * delta]), wk, m_rel_nodes, m_rel_w)
    diag = {"delta": float(delta), "levels": levels, "order": order}
    if probes[0] <= 0.0:
        band = 0.0
        diag["band_exponent"] = None
    else:
        c = float(np.log2(probes[1] / probes[0]))
        diag["band_exponent"] = c
        if c - 2.0 * s <= divergence_margin:
            raise NotInSpaceError(
                f"seminorm diverges: ||f_m - f_m'||^2 ~ |m - m'|^{c:.4f} near the diagonal, "
                f"needs exponent > 2s = {2 * s:.4f}"
            )
        band = 2.0 * probes[0] * delta ** (-2.0 * s) / (c - 2.0 * s)
    diag["band_part"] = float(scale * band)
    value = float(scale * (body + band))
    if not np.isfinite(value) or value > overflow:
        raise NotInSpaceError(f"seminorm exceeds overflow guard ({value:.3e})")
    return value, diag


def full_norm(f: FiberedFunction, p: SpectralParams, **kwargs) -> NormReport:
    """Squared ``||f||_{s,gamma}`` split into its L2 and seminorm parts.

    The L2 part uses the grid quadrature (so it matches Parseval on the
    grid); the seminorm integrates the closed-form descriptor, or an
    interpolant of the tabulated coefficients, on its own graded rule.
    Keyword arguments are passed to :func:`seminorm`.

    Raises
    ------
    NotInSpaceError
        If the seminorm is infinite (or beyond the overflow guard).
    """
    l2 = float(f.grid.integrate(fiber_norms_sq(f.coeffs, p.gamma)))
    semi, diag = seminorm(f, p, **kwargs)
    return NormReport(l2, semi, l2 + semi, diag)


@dataclass(frozen=True)
class Membership:
    member: bool
    reason: str
    norm: NormReport | None = None


def membership(f: FiberedFunction, p: SpectralParams, tol: float = 1e-10) -> Membership:
    """Finite ``s,gamma`` norm and vanishing ``m = 0`` fiber."""
    try:
        report = full_norm(f, p)
    except NotInSpaceError as exc:
        return Membership(False, str(exc))
    f0 = np.sqrt(fiber_norms_sq(f.fiber_at_zero(max(p.s - 0.5, 1e-3)), p.gamma))
    if f0 > tol:
        return Membership(False, f"fiber at m=0 does not vanish (norm {f0:.3e})", report)
    return Membership(True, "ok", report)


def _sample_points(f: FiberedFunction, h: float):
    """Grid nodes plus both end fibers, with coefficients."""
    ev = f.evaluator(h)
    ends = ev.evaluate(np.array([0.0, 1.0]))
    m = np.concatenate(([0.0], f.grid.nodes, [1.0]))
    c = np.concatenate((ends[:1], f.coeffs, ends[1:]))
    # drop an end point that coincides with a node
    keep = np.concatenate(([True], np.diff(m) > 0))
    return m[keep], c[keep]


def _pairwise_sups(f: FiberedFunction, p: SpectralParams, chunk: int = 64):
    h = p.s - 0.5
    m, c = _sample_points(f, h)
    wk = _mode_weights(f.kmax, p.gamma)
    kw = np.sqrt(wk)
    pair = four = 0.0
    for i in range(0, len(m), chunk):
        rows = slice(i, i + chunk)
        dm = np.abs(m[rows, None] - m[None, :])
        mask = dm > 0
        scale = np.where(mask, dm, 1.0) ** h
        diff = np.abs(c[rows, None, :] - c[None, :, :])
        norms = np.sqrt((diff**2) @ wk)
        pair = max(pair, float(np.max(np.where(mask, norms / scale, 0.0))))
        fmax = np.max(diff * kw, axis=2)
        four = max(four, float(np.max(np.where(mask, fmax / scale, 0.0))))
    pos = m > 0
    decay = float(np.max(np.sqrt(fiber_norms_sq(c[pos], p.gamma)) / m[pos] ** h))
    return pair, four, decay


def holder_check(f: FiberedFunction, p: SpectralParams) -> HolderConstants:
    """Fitted Hölder constants of ``m -> f_m`` in ``H^gamma`` with exponent ``s - 1/2``.

    Suprema run over the grid nodes plus the end fibers ``m = 0`` and
    ``m = 1`` (from the descriptor, or extrapolated).
    """
    pair, _, decay = _pairwise_sups(f, p)
    return HolderConstants(pair, decay)


def fourier_holder_check(f: FiberedFunction, p: SpectralParams) -> float:
    """``sup |f_hat_m(k) - f_hat_m'(k)| |k|^gamma / |m - m'|^(s - 1/2)`` over ``k != 0`` and fiber pairs.

    Never exceeds the pairwise constant of :func:`holder_check`.
    """
    return _pairwise_sups(f, p)[1]
