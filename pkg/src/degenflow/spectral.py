"""Spectrum of ``A``, the spectral distribution ``F(lam) = (E(lam) f, g)`` and the density of states.

Fiber ``m`` has eigenvalues ``k phi(m)``, ``k`` in Z. Mode ``k`` of ``f``
therefore enters ``F(lam)`` on the set of fibers with ``k phi(m) <= lam``,
and for a power law ``phi = c m**alpha`` the derivative ``dF/dlam`` is a
series over the preimages ``m_k = (|lam| / (c |k|))**(1/alpha)``:

    dF/dlam = sum_{k >= k0} f_hat_{m_k}(k) conj(g_hat_{m_k}(k)) / (alpha c |k| m_k**(alpha - 1)).

:func:`dos_oracle` computes the same derivative independently, from exact
band integrals of ``F`` and Richardson extrapolation of the difference
quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._quad import loglog_fit, panel_rule, richardson
from .core import DomainError, FiberedFunction, FlowProfile, ParameterError, SpectralParams

_BAND_ORDER = 16
RESONANCE_GAP = 1e-6
RESONANCE_SHIFT = 2e-6


# --------------------------------------------------------------------------- #
# Band spectrum
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class BandSpectrum:
    """Union of the bands ``k [phi_min, phi_max]``, ``0 < |k| <= kmax``, sorted and merged.

    ``raw`` keeps the unmerged per-``k`` bands. Endpoints keep the numeric
    type of the profile values, so ``Fraction`` profiles give exact bands.
    """

    bands: tuple
    gap_at_zero: bool
    raw: tuple = ()

    def positive_bands(self) -> tuple:
        """Bands intersected with ``[0, inf)``."""
        out = []
        for lo, hi in self.bands:
            if hi >= 0:
                out.append((lo if lo > 0 else 0 * abs(hi), hi))
        return tuple(out)

    def gap(self):
        """Open gap ``(0, g)`` above zero, or ``None`` when bands reach zero."""
        if not self.gap_at_zero:
            return None
        pos = [lo for lo, _ in self.bands if lo > 0]
        return (0 * pos[0], pos[0]) if pos else None

    def contains(self, lam) -> bool:
        return any(lo <= lam <= hi for lo, hi in self.bands)


def _merge(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def band_spectrum(profile, kmax: int) -> BandSpectrum:
    """Bands of ``A`` restricted to modes ``0 < |k| <= kmax``.

    Touching bands are merged, since the spectrum is their union. For a
    degenerate profile (``phi_min = 0``) every band touches zero, so the
    positive and negative halves merge into ``[-kmax phi_max, kmax phi_max]``.
    """
    if int(kmax) != kmax or kmax < 1:
        raise ParameterError(f"kmax must be a positive integer, got {kmax}")
    lo, hi = profile.phi_min, profile.phi_max
    raw = []
    for k in range(1, int(kmax) + 1):
        raw.append((k * lo, k * hi))
        raw.append((-k * hi, -k * lo))
    bands = _merge(raw)
    return BandSpectrum(tuple(bands), gap_at_zero=lo > 0, raw=tuple(sorted(raw)))


# --------------------------------------------------------------------------- #
# Spectral distribution
# --------------------------------------------------------------------------- #

def spectral_distribution(f: FiberedFunction, g: FiberedFunction, profile, lam: float) -> complex:
    """``F(lam) = int_0^1 sum_{k != 0, k phi(m) <= lam} f_hat_m(k) conj(g_hat_m(k)) dm`` on the grid."""
    f._check_compatible(g)
    energies = profile(f.grid.nodes)[:, None] * f.ks[None, :]
    mask = (energies <= lam) & (f.ks != 0)[None, :]
    prod = np.where(mask, f.coeffs * np.conj(g.coeffs), 0.0)
    return complex(f.grid.integrate(np.sum(prod, axis=1)))


def resonance_shift(f: FiberedFunction, profile, lam: float, gap: float = RESONANCE_GAP,
                    shift: float = RESONANCE_SHIFT) -> tuple[float, bool]:
    """Move ``lam`` off grid energies ``k phi(m_i)`` of populated modes.

    Returns ``(lam', shifted)``. A level within ``gap`` of a grid energy makes
    the grid distribution jump there, so it is moved up by ``shift`` (and
    down if that lands on another energy).
    """
    ks = f.populated()
    ks = ks[ks != 0]
    if len(ks) == 0:
        return float(lam), False
    energies = (profile(f.grid.nodes)[:, None] * ks[None, :]).ravel()

    def near(x):
        return bool(np.any(np.abs(energies - x) < gap))

    if not near(lam):
        return float(lam), False
    for cand in (lam + shift, lam - shift, lam + 2 * shift, lam - 2 * shift):
        if not near(cand):
            return float(cand), True
    return float(lam + shift), True


# --------------------------------------------------------------------------- #
# Density of states: series
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class DosSample:
    lam: float
    series_value: complex
    oracle_value: complex | None = None
    k0: int = 1
    terms_used: int = 0
    tail_bound: float = 0.0
    tol: float = 1e-12
    converged: bool = True

    def to_dict(self) -> dict:
        def enc(z):
            return None if z is None else {"re": float(np.real(z)), "im": float(np.imag(z))}
        return {"lambda": self.lam, "series_value": enc(self.series_value),
                "oracle_value": enc(self.oracle_value), "k0": self.k0,
                "terms_used": self.terms_used, "tail_bound": self.tail_bound,
                "tol": self.tol, "converged": self.converged}


def _profile_for(p: SpectralParams, profile):
    if profile is None:
        return FlowProfile(p.alpha)
    if not isinstance(profile, FlowProfile):
        raise ParameterError("the DoS series needs a power-law FlowProfile")
    if abs(profile.alpha - p.alpha) > 1e-12:
        raise ParameterError(f"profile alpha {profile.alpha} differs from parameter alpha {p.alpha}")
    return profile


def dos_window(profile: FlowProfile) -> float:
    """Default admissible window ``r = min(1, ...)``: levels below it have all preimages in the power-law zone."""
    return min(1.0, profile.dos_window)


def _decay_constants(f: FiberedFunction, p: SpectralParams, ks) -> np.ndarray:
    """Per-mode ``sup_i |k|^gamma |f_hat_{m_i}(k)| / m_i**(s - 1/2)`` over the grid."""
    m = f.grid.nodes
    cols = np.abs(f.coeffs[:, ks + f.kmax]) / m[:, None] ** (p.s - 0.5)
    return np.max(cols, axis=0, initial=0.0) * np.abs(ks) ** p.gamma


def dos_series(f: FiberedFunction, g: FiberedFunction, p: SpectralParams, lam: float,
               tol: float = 1e-12, *, profile: FlowProfile | None = None,
               window: float | None = None) -> DosSample:
    """Density of states ``d/dlam (E(lam) f, g)`` from the preimage series.

    Terms run over ``k >= k0 = max(1, ceil(|lam|/c))`` (negative ``k`` when
    ``lam < 0``), skipping unpopulated modes. A term with ``m_k = 1`` exactly
    is kept with full weight. Summation stops once the bound on the remaining
    populated terms,

        D_f(k) D_g(k) / (alpha c) (|lam|/c)**(2s/alpha - 1) k**(-(2 gamma + 2s/alpha)),

    with ``D(k)`` the per-mode Hölder decay constants, falls below ``tol``.

    Raises
    ------
    ParameterError
        If ``gamma + s/alpha <= 1/2``: the series is not summable.
    DomainError
        If ``lam = 0`` or ``|lam| >= r``.
    """
    if not p.constraint_ok():
        raise ParameterError(
            f"gamma + s/alpha = {p.gamma + p.s / p.alpha:.6g} <= 1/2: the DoS series is not summable"
        )
    profile = _profile_for(p, profile)
    lam = float(lam)
    r = dos_window(profile) if window is None else float(window)
    if lam == 0.0:
        raise DomainError("the DoS is evaluated away from lambda = 0")
    if abs(lam) >= r:
        raise DomainError(f"|lambda| = {abs(lam)} outside the admissible window (0, {r})")
    f._check_compatible(g)
    c, alpha = profile.c, profile.alpha
    sign = 1 if lam > 0 else -1
    k0 = max(1, math.ceil(abs(lam) / c))

    pop = np.union1d(f.populated(), g.populated())
    pop = pop[sign * pop >= k0]
    pop = pop[np.argsort(np.abs(pop))]
    if len(pop) == 0:
        return DosSample(lam, 0j, k0=k0, tol=tol)

    kabs = np.abs(pop).astype(float)
    m = profile.power_preimage(abs(lam), kabs)
    keep = m <= 1.0
    pop, kabs, m = pop[keep], kabs[keep], m[keep]
    ef, eg = f.evaluator(max(p.s - 0.5, 1e-3)), g.evaluator(max(p.s - 0.5, 1e-3))
    vf = ef.modes(pop, m)
    vg = eg.modes(pop, m)
    terms = vf * np.conj(vg) / (alpha * c * kabs * m ** (alpha - 1.0))

    q = 2.0 * p.gamma + p.p
    scale = (abs(lam) / c) ** (p.p - 1.0) / (alpha * c)
    bounds = _decay_constants(f, p, pop) * _decay_constants(g, p, pop) * scale * kabs ** (-q)
    bounds = np.maximum(bounds, np.abs(terms))
    tails = np.concatenate((np.cumsum(bounds[::-1])[::-1][1:], [0.0]))

    used = len(terms)
    for i, t in enumerate(tails):
        if t < tol:
            used = i + 1
            break
    total = complex(math.fsum(terms[:used].real) + 1j * math.fsum(terms[:used].imag))
    tail = float(tails[used - 1])
    return DosSample(lam, total, k0=k0, terms_used=used, tail_bound=tail, tol=tol,
                     converged=tail < tol)


# --------------------------------------------------------------------------- #
# Density of states: difference-quotient oracle
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class DosOracleResult:
    value: complex
    error: float
    flagged: bool
    h_values: np.ndarray = field(repr=False, default=None)
    i_values: np.ndarray = field(repr=False, default=None)   # I(h): fibers m >= (h/c)**(1/alpha)
    r_values: np.ndarray = field(repr=False, default=None)   # R(h): fibers m < (h/c)**(1/alpha)


def _band_parts(ef, eg, ks, profile: FlowProfile, lam: float, h: float):
    """``(I(h), R(h))``: the difference quotient ``(F(lam + h) - F(lam)) / h`` split at ``m = (h/c)**(1/alpha)``.

    Mode ``k`` (same sign as ``lam``) contributes the integral of
    ``f_hat ĝ*`` over the fibers where ``lam < k phi(m) <= lam + h``; in the
    power-law zone that set is an interval with explicit endpoints.
    """
    kabs = np.abs(ks).astype(float)
    top = profile.m0
    if lam > 0:
        lo_e, hi_e = lam, lam + h
    else:
        lo_e, hi_e = -lam - h, -lam
    a = np.minimum(profile.power_preimage(lo_e, kabs), top)
    b = np.minimum(profile.power_preimage(hi_e, kabs), top)
    split = (h / profile.c) ** (1.0 / profile.alpha)
    mid = np.clip(split, a, b)
    edges = np.stack([np.stack([a, mid], -1), np.stack([mid, b], -1)])  # (2, K, 2)
    parts = []
    for e in edges:
        nodes, weights = panel_rule(e, _BAND_ORDER)
        vals = ef.modes(ks, nodes) * np.conj(eg.modes(ks, nodes))
        parts.append(complex(np.sum(weights * vals)) / h)
    return parts[1], parts[0]


def dos_oracle(f: FiberedFunction, g: FiberedFunction, profile: FlowProfile, lam: float,
               h_seq=None, *, tol: float = 1e-9, holder_exponent: float = 0.25) -> DosOracleResult:
    """Density of states by Richardson extrapolation of ``(F(lam + h) - F(lam)) / h``.

    ``F`` is integrated in the continuum (descriptor or interpolant), band by
    band, so the quotient is smooth in ``h``. The default sequence is
    ``h_j = h0 2**-j``, ``j = 0..6``, with ``h0 = |lam|/8`` shrunk so that
    ``lam + h0`` stays at least halfway inside the power-law window. The
    result is flagged when the extrapolation error exceeds ``10 tol``
    relative to ``1 + |value|``.
    """
    lam = float(lam)
    if lam == 0.0:
        raise DomainError("the DoS is evaluated away from lambda = 0")
    if not isinstance(profile, FlowProfile):
        raise ParameterError("the DoS oracle needs a power-law FlowProfile")
    f._check_compatible(g)
    r = profile.dos_window
    if h_seq is None:
        h0 = abs(lam) / 8.0
        if abs(lam) < r:
            h0 = min(h0, (r - abs(lam)) / 2.0)
        h_seq = h0 * 2.0 ** -np.arange(7)
    h_seq = np.asarray(h_seq, dtype=float)
    if np.any(h_seq <= 0) or np.any(h_seq >= abs(lam) / 2.0):
        raise ParameterError("h-sequence must lie in (0, |lambda|/2)")
    if profile.m0 < 1.0 and abs(lam) + h_seq.max() > r:
        raise DomainError("levels beyond the power-law window need preimages in the tabulated zone")

    sign = 1 if lam > 0 else -1
    ks = np.union1d(f.populated(), g.populated())
    ks = ks[sign * ks > 0]
    ef, eg = f.evaluator(holder_exponent), g.evaluator(holder_exponent)
    i_vals = np.zeros(len(h_seq), dtype=complex)
    r_vals = np.zeros(len(h_seq), dtype=complex)
    if len(ks):
        for j, h in enumerate(h_seq):
            i_vals[j], r_vals[j] = _band_parts(ef, eg, ks, profile, lam, h)
    value, err, _ = richardson(i_vals + r_vals, ratio=h_seq[0] / h_seq[1] if len(h_seq) > 1 else 2.0)
    flagged = bool(err > 10.0 * tol * (1.0 + abs(value)))
    return DosOracleResult(complex(value), float(err), flagged, h_seq, i_vals, r_vals)


def remainder_slope(result: DosOracleResult, floor: float = 1e-300):
    """Log-log slope of ``|R(h)|`` against ``h`` over the samples where it is nonzero.

    Returns ``(slope, points_used)``; the slope is ``nan`` with fewer than two points.
    """
    mag = np.abs(result.r_values)
    use = mag > floor
    if np.count_nonzero(use) < 2:
        return float("nan"), int(np.count_nonzero(use))
    slope, _, _ = loglog_fit(result.h_values[use], mag[use])
    return slope, int(np.count_nonzero(use))


# --------------------------------------------------------------------------- #
# Envelope of the DoS bound
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class EnvelopeFit:
    constant: float   # sup over lambdas of ratio / |lam|**slope
    slope: float
    lambdas: np.ndarray = field(repr=False, default=None)
    ratios: np.ndarray = field(repr=False, default=None)
    residual: float = 0.0


def dos_bound_envelope(ensemble, p: SpectralParams, lambdas, norms=None, *,
                       profile: FlowProfile | None = None, tol: float = 1e-12) -> EnvelopeFit:
    """Fit ``sup_{f,g} |dos(f, g, lam)| / (||f|| ||g||) ~ C |lam|**slope``.

    ``norms`` defaults to ones (members already normalised). With an
    identically zero ensemble the envelope is 0 and the slope ``nan``.
    """
    if not p.constraint_ok():
        raise ParameterError("constraint gamma + s/alpha > 1/2 violated")
    ensemble = list(ensemble)
    lambdas = np.asarray(lambdas, dtype=float)
    norms = np.ones(len(ensemble)) if norms is None else np.asarray(norms, dtype=float)
    ratios = np.zeros(len(lambdas))
    for j, lam in enumerate(lambdas):
        best = 0.0
        for a, fa in enumerate(ensemble):
            for b, fb in enumerate(ensemble[a:], start=a):
                val = dos_series(fa, fb, p, lam, tol, profile=profile).series_value
                best = max(best, abs(val) / (norms[a] * norms[b]))
        ratios[j] = best
    if not np.any(ratios > 0):
        return EnvelopeFit(0.0, float("nan"), lambdas, ratios)
    use = ratios > 0
    slope, _, rms = loglog_fit(np.abs(lambdas[use]), ratios[use])
    const = float(np.max(ratios[use] / np.abs(lambdas[use]) ** slope))
    return EnvelopeFit(const, slope, lambdas, ratios, rms)
