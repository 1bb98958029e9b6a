"""The flow ``e^{itA}``, its time averages and the averaging error.

Everything is diagonal in ``(m, k)``: the flow multiplies mode ``k`` on fiber
``m`` by ``exp(i t k phi(m))`` and the time average over ``[-T, T]`` by
``sinc(T k phi(m))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._quad import geometric_edges, panel_rule
from .core import FiberedFunction, FlowProfile, MultipliedModes, ParameterError

# continuum quadrature in the phase variable x = T |k| phi(m)
_HEAD_LEVELS = 40
_OSC_PANELS = 200  # width-pi panels up to x_c = 200 pi
_TAIL_PANELS = 40
_ORDER = 8


def sinc(x):
    """``sin(x)/x`` with a Taylor branch near zero."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    out[small] = 1.0 - xs**2 / 6.0 + xs**4 / 120.0
    xl = x[~small]
    out[~small] = np.sin(xl) / xl
    return out


def _energies(f: FiberedFunction, profile) -> np.ndarray:
    """``k phi(m_i)`` for every node and mode, shape ``(nodes, 2 kmax + 1)``."""
    return profile(f.grid.nodes)[:, None] * f.ks[None, :]


def flow(f: FiberedFunction, profile, t: float) -> FiberedFunction:
    """``e^{itA} f``: rotate mode ``k`` on fiber ``m`` by the phase ``t k phi(m)``."""
    t = float(t)
    coeffs = f.coeffs * np.exp(1j * t * _energies(f, profile))
    desc = None
    if f.descriptor is not None:
        desc = MultipliedModes(f.kmax, f.descriptor, lambda m, k: np.exp(1j * t * k * profile(m)))
    return FiberedFunction._trusted(f.grid, f.kmax, coeffs, desc)


def time_average(f: FiberedFunction, profile, T: float) -> FiberedFunction:
    """``P^T f = (1/2T) int_{-T}^{T} e^{itA} f dt`` via the multiplier ``sinc(T k phi(m))``."""
    if not T > 0:
        raise ParameterError(f"averaging time must be positive, got {T}")
    T = float(T)
    coeffs = f.coeffs * sinc(T * _energies(f, profile))
    desc = None
    if f.descriptor is not None:
        desc = MultipliedModes(f.kmax, f.descriptor, lambda m, k: sinc(T * k * profile(m)))
    return FiberedFunction._trusted(f.grid, f.kmax, coeffs, desc)


def time_average_oracle(f: FiberedFunction, profile, T: float, *, tol: float = 1e-10,
                        order: int = 16, max_panels: int = 1 << 14) -> FiberedFunction:
    """``P^T f`` by direct quadrature of the flow over ``[-T, T]``.

    Composite Gauss-Legendre panels are doubled until two successive
    refinements differ by less than ``tol`` in every coefficient. Only meant
    to validate :func:`time_average`.
    """
    if not T > 0:
        raise ParameterError(f"averaging time must be positive, got {T}")

    def average(panels):
        nodes, weights = panel_rule(np.linspace(-T, T, panels + 1), order)
        acc = np.zeros_like(f.coeffs)
        for t, w in zip(nodes, weights):
            acc += w * flow(f, profile, t).coeffs
        return acc / (2.0 * T)

    panels = 2
    prev = average(panels)
    while True:
        panels *= 2
        cur = average(panels)
        if np.max(np.abs(cur - prev), initial=0.0) < tol:
            return FiberedFunction._trusted(f.grid, f.kmax, cur)
        if panels >= max_panels:
            raise ArithmeticError(f"time quadrature did not converge with {panels} panels")
        prev = cur


def project_mean(f: FiberedFunction) -> FiberedFunction:
    """Fiberwise angular mean ``Pf`` (the ``k = 0`` content), always zero here."""
    coeffs = np.zeros_like(f.coeffs)
    coeffs[:, f.kmax] = f.coeffs[:, f.kmax]
    return FiberedFunction._trusted(f.grid, f.kmax, coeffs)


@dataclass(frozen=True)
class AveragingResult:
    T: float
    error_l2: float
    method: str = "closed-form sinc"  # or "time-quadrature oracle"
    quadrature: str = "grid"          # or "continuum"


def _power_zone_energy(ev, profile: FlowProfile, T: float, ks: np.ndarray) -> np.ndarray:
    """``int_0^{m0} |f_hat_m(k)|^2 sinc^2(T k phi(m)) dm`` for each ``k`` in ``ks``.

    Substitutes ``x = T |k| c m^alpha``. Up to ``x_c = 200 pi`` the
    oscillation is resolved panel by panel; beyond it ``sin^2`` is replaced by
    its mean ``1/2`` plus the leading boundary term of the oscillatory
    remainder (``x_c`` is a multiple of pi, so only the upper end
    contributes). The neglected remainder is ``O(x_c^-3)`` relative.
    """
    alpha = profile.alpha
    scale = T * np.abs(ks).astype(float) * profile.c
    upper = scale * profile.m0**alpha
    xc = _OSC_PANELS * np.pi

    head = np.minimum(np.pi, upper)[:, None] * geometric_edges(1.0, _HEAD_LEVELS)[None, :]
    osc = np.minimum(np.pi * np.arange(1, _OSC_PANELS + 1)[None, :], upper[:, None])
    t = np.linspace(0.0, 1.0, _TAIL_PANELS + 1)
    tail = xc * (np.maximum(upper, xc) / xc)[:, None] ** t[None, :]

    def density(x):
        m = (x / scale[:, None]) ** (1.0 / alpha)
        m = np.minimum(m, profile.m0)
        a = ev.modes(ks, m)
        return np.abs(a) ** 2 * m / (alpha * x)

    xo = [panel_rule(head, _ORDER), panel_rule(osc, _ORDER)]
    x = np.concatenate([xo[0][0], xo[1][0]], axis=1)
    w = np.concatenate([xo[0][1], xo[1][1]], axis=1)
    energy = np.sum(w * density(x) * sinc(x) ** 2, axis=1)

    xt, wt = panel_rule(tail, _ORDER)
    energy += np.sum(wt * density(xt) / (2.0 * xt**2), axis=1)
    far = upper > xc
    if np.any(far):
        xu = upper[:, None]
        h_up = density(xu)[:, 0] / (2.0 * upper**2)
        energy -= np.where(far, h_up * np.sin(2.0 * upper) / 2.0, 0.0)
    return energy


def _table_zone_energy(ev, profile: FlowProfile, T: float, ks: np.ndarray,
                       max_panels: int = 200_000) -> np.ndarray:
    """Same integral over the tabulated zone ``[m0, 1]``, panels sized by phase."""
    ms, vs = profile._table()
    out = np.zeros(len(ks))
    for i, k in enumerate(ks):
        for (ma, mb), (va, vb) in zip(zip(ms[:-1], ms[1:]), zip(vs[:-1], vs[1:])):
            n = int(min(max_panels, max(1, np.ceil(2 * T * abs(k) * abs(vb - va) / np.pi))))
            nodes, weights = panel_rule(np.linspace(ma, mb, n + 1), _ORDER)
            a = ev.modes(np.array([k]), nodes[None, :])[0]
            phase = T * abs(k) * np.interp(nodes, ms, vs)
            out[i] += np.sum(weights * np.abs(a) ** 2 * sinc(phase) ** 2)
    return out


def mode_energies(f: FiberedFunction, profile: FlowProfile, T: float, holder_exponent: float = 0.25):
    """Continuum ``||(P^T - P) f||^2`` split by mode; returns ``(ks, energies)``."""
    if not isinstance(profile, FlowProfile):
        raise ParameterError("continuum quadrature needs a power-law FlowProfile")
    ev = f.evaluator(holder_exponent)
    ks = np.asarray(ev.populated(), dtype=int)
    ks = ks[ks != 0]
    if len(ks) == 0:
        return ks, np.zeros(0)
    energy = _power_zone_energy(ev, profile, float(T), ks)
    if profile.m0 < 1.0:
        energy += _table_zone_energy(ev, profile, float(T), ks)
    return ks, energy


def error_norm(f: FiberedFunction, profile, T: float, *, method: str = "sinc",
               quadrature: str = "auto") -> AveragingResult:
    """``||(P^T - P) f||_{L^2}``.

    ``quadrature="grid"`` evaluates
    ``(sum_i w_i sum_k |f_hat_{m_i}(k)|^2 sinc^2(T k phi(m_i)))^(1/2)`` on the
    grid of ``f``. ``"continuum"`` integrates the closed-form descriptor in m
    with a rule adapted to the oscillation of ``sinc(T k phi(m))``, which the
    grid cannot resolve once ``T k`` is large. ``"auto"`` picks continuum when
    ``f`` carries a descriptor. ``method="time-quadrature"`` replaces the sinc
    multiplier by :func:`time_average_oracle` (grid only).
    """
    if not T > 0:
        raise ParameterError(f"averaging time must be positive, got {T}")
    if quadrature == "auto":
        quadrature = "continuum" if f.descriptor is not None and isinstance(profile, FlowProfile) else "grid"
    if method == "time-quadrature":
        avg = time_average_oracle(f, profile, T)
        err = (avg - project_mean(f)).l2_norm()
        return AveragingResult(float(T), err, "time-quadrature oracle", "grid")
    if method != "sinc":
        raise ParameterError(f"unknown method {method!r}")
    if quadrature == "grid":
        mult = sinc(T * _energies(f, profile)) ** 2
        err = np.sqrt(f.grid.integrate(np.sum(np.abs(f.coeffs) ** 2 * mult, axis=1)))
        return AveragingResult(float(T), float(err), "closed-form sinc", "grid")
    if quadrature == "continuum":
        _, energy = mode_energies(f, profile, T)
        return AveragingResult(float(T), float(np.sqrt(max(np.sum(energy), 0.0))),
                               "closed-form sinc", "continuum")
    raise ParameterError(f"unknown quadrature {quadrature!r}")
