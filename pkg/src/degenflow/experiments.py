"""Rate measurements for ``||(P^T - P) f||`` and envelope checks.

The supremum over a finite ensemble only bounds the operator norm from
below, so every comparison with a predicted exponent is one-sided: measured
errors must lie *below* the predicted envelope, decaying at least as fast.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._quad import loglog_fit
from .core import FiberedFunction, FlowProfile, ParameterError, SpectralParams
from .ensemble import EnsembleSpec, make_random, normalize
from .evolution import error_norm

FIT_T_MIN = 10.0
ONE_SIDED_NOTE = ("one-sided check: the ensemble supremum bounds the operator norm from below, "
                  "so only decay at least as fast as predicted is asserted")


@dataclass(frozen=True)
class RateFit:
    samples: tuple                # (T, sup_error) pairs, all T
    fitted_slope: float
    envelope_constant: float      # C with C T**(-rate) through the first sample in the window
    window: tuple                 # (T_lo, T_hi) used in the fit
    residual: float
    predicted_slope: float
    degenerate: bool = False
    note: str = ONE_SIDED_NOTE
    extra: dict = field(default_factory=dict)

    @property
    def T(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    @property
    def sup_error(self) -> np.ndarray:
        return np.array([e for _, e in self.samples])

    def predicted_envelope(self) -> np.ndarray:
        return self.envelope_constant * self.T ** self.predicted_slope

    def to_dict(self) -> dict:
        return {
            "samples": [{"T": float(t), "sup_error": float(e)} for t, e in self.samples],
            "fitted_slope": self.fitted_slope, "envelope_constant": self.envelope_constant,
            "window": list(self.window), "residual": self.residual,
            "predicted_slope": self.predicted_slope, "degenerate": self.degenerate,
            "note": self.note, "extra": dict(self.extra),
        }


def geometric_grid(start: float, stop: float, points: int) -> np.ndarray:
    if not (0 < start <= stop) or points < 1:
        raise ParameterError("geometric grid needs 0 < start <= stop and at least one point")
    return np.geomspace(start, stop, int(points))


def _member_errors(f, profile, T_grid, quadrature):
    return np.array([error_norm(f, profile, T, quadrature=quadrature).error_l2 for T in T_grid])


def rate_experiment(ensemble, profile: FlowProfile, p: SpectralParams, T_grid, *,
                    window_min: float = FIT_T_MIN, jobs: int = 1, quadrature: str = "auto") -> RateFit:
    """Supremum over members of ``||(P^T - P) f||`` on ``T_grid`` and its log-log slope.

    Members are assumed normalised in ``||.||_{s,gamma}``. Identically zero
    members are skipped; if nothing else remains, or every error vanishes,
    the fit is returned flagged as degenerate with ``nan`` slope.
    """
    ensemble = list(ensemble)
    if not ensemble:
        raise ParameterError("rate experiment needs a nonempty ensemble")
    T_grid = np.asarray(T_grid, dtype=float)
    if np.any(T_grid <= 0):
        raise ParameterError("averaging times must be positive")
    members = [f for f in ensemble if np.any(f.coeffs != 0)]
    if members:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                errs = list(pool.map(lambda f: _member_errors(f, profile, T_grid, quadrature), members))
        else:
            errs = [_member_errors(f, profile, T_grid, quadrature) for f in members]
        sup = np.max(np.array(errs), axis=0)
    else:
        sup = np.zeros(len(T_grid))
    samples = tuple((float(t), float(e)) for t, e in zip(T_grid, sup))
    predicted = -p.rate
    use = (T_grid >= window_min) & (sup > 0)
    if np.count_nonzero(use) < 2:
        return RateFit(samples, float("nan"), float("nan"), (float(window_min), float(T_grid.max())),
                       float("nan"), predicted, degenerate=True,
                       note="degenerate data: fewer than two nonzero errors in the fit window",
                       extra={"members": len(members)})
    slope, _, rms = loglog_fit(T_grid[use], sup[use])
    t0 = T_grid[use][0]
    const = float(sup[use][0] * t0 ** (-predicted))
    window = (float(T_grid[use].min()), float(T_grid[use].max()))
    return RateFit(samples, slope, const, window, rms, predicted, extra={"members": len(members)})


@dataclass(frozen=True)
class EnvelopeReport:
    passed: bool
    max_excess: float          # max over window of log(err) - log(envelope)
    constant: float
    predicted_slope: float
    tol: float
    note: str = ONE_SIDED_NOTE


def envelope_check(fit: RateFit, predicted_slope: float, tol: float) -> EnvelopeReport:
    """Do all samples in the window lie below ``C T**predicted_slope`` up to ``tol`` in log space?

    ``C`` is calibrated on the smallest ``T`` of the window.
    """
    if fit.degenerate:
        raise ParameterError("envelope check needs a non-degenerate fit")
    T, err = fit.T, fit.sup_error
    lo, hi = fit.window
    use = (T >= lo) & (T <= hi) & (err > 0)
    T, err = T[use], err[use]
    const = float(err[0] * T[0] ** (-predicted_slope))
    excess = np.log(err) - np.log(const * T ** predicted_slope)
    worst = float(np.max(excess))
    return EnvelopeReport(worst <= tol, worst, const, float(predicted_slope), float(tol))


def default_gamma(s: float, alpha: float) -> float:
    """Smallest admissible ``gamma`` plus a margin: ``max(0, 1/2 - s/alpha) + 0.1``."""
    return max(0.0, 0.5 - s / alpha) + 0.1


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    gamma: float
    measured_slope: float
    predicted_rate: float
    envelope_ok: bool
    max_excess: float


def prepare_ensemble(spec: EnsembleSpec, *, jobs: int = 1) -> tuple[list[FiberedFunction], np.ndarray]:
    """Members of ``spec`` divided by their norms; returns ``(members, norms)``."""
    raw = make_random(spec)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(lambda f: normalize(f, spec.params), raw))
    else:
        out = [normalize(f, spec.params) for f in raw]
    return [f for f, _ in out], np.array([n for _, n in out])


def alpha_sweep(alphas, s: float, gamma_policy=default_gamma, *, kmax: int = 32, count: int = 4,
                seed: int = 7, mgrid: int = 128, T_grid=None, tol: float = 0.15, jobs: int = 1):
    """``(alpha, gamma, measured slope, predicted s/(s+alpha), envelope ok)`` for each ``alpha``."""
    T_grid = geometric_grid(10.0, 1e4, 25) if T_grid is None else np.asarray(T_grid, float)
    rows = []
    for alpha in alphas:
        gamma = float(gamma_policy(s, alpha))
        p = SpectralParams(s, gamma, float(alpha)).require_valid()
        members, _ = prepare_ensemble(EnsembleSpec(p, kmax, count, seed, mgrid=mgrid), jobs=jobs)
        fit = rate_experiment(members, FlowProfile(float(alpha)), p, T_grid, jobs=jobs)
        rep = envelope_check(fit, -p.rate, tol)
        rows.append(SweepRow(float(alpha), gamma, fit.fitted_slope, p.rate, rep.passed, rep.max_excess))
    return rows
