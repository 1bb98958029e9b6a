"""Domain types: flow profiles, spectral parameters, m-grids and fibered functions.

Conventions
-----------
The angle lives on ``[0, 2*pi)`` and fibers are expanded in the orthonormal
basis ``e^{ik theta} / sqrt(2 pi)``. A fibered function stores, for every
quadrature node ``m_i`` of an :class:`MGrid`, the coefficients
``f_hat_{m_i}(k)`` for ``k = -kmax..kmax``. With this normalisation the fiber
generator ``-i phi(m) d/dtheta`` acts on mode ``k`` as multiplication by
``k phi(m)``, so the spectrum of a fiber is exactly ``phi(m) Z``.

The ``k = 0`` column is kept for simple indexing but is pinned to zero: all
fibers are mean-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._quad import panel_rule


class ParameterError(ValueError):
    """Invalid parameters for an operation (maps to CLI exit code 2)."""


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class NotInSpaceError(ArithmeticError):
    """A function fails the membership test for the requested Sobolev space."""


# --------------------------------------------------------------------------- #
# Flow profiles
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class FlowProfile:
    """Speed of the flow across fibers: ``phi(m) = c m**alpha`` on ``[0, m0)``.

    On ``[m0, 1]`` the speed is a tabulated, piecewise-linear, strictly
    positive continuation given by ``extension`` (pairs ``(m, phi)``), which
    must start at ``m0`` with the value ``c * m0**alpha``. With ``m0 = 1`` the
    profile is a pure power law and no table is needed.
    """

    alpha: float
    c: float = 1.0
    m0: float = 1.0
    extension: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ParameterError(f"alpha must be a positive real, got {self.alpha}")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ParameterError(f"c must be a positive real, got {self.c}")
        if not (0.0 < self.m0 <= 1.0):
            raise ParameterError(f"m0 must lie in (0, 1], got {self.m0}")
        ext = tuple((float(m), float(v)) for m, v in self.extension)
        object.__setattr__(self, "extension", ext)
        if self.m0 < 1.0:
            if len(ext) < 2:
                raise ParameterError("m0 < 1 needs a tabulated extension on [m0, 1]")
            ms = np.array([e[0] for e in ext])
            vs = np.array([e[1] for e in ext])
            if abs(ms[0] - self.m0) > 1e-14 or abs(ms[-1] - 1.0) > 1e-14:
                raise ParameterError("extension table must span exactly [m0, 1]")
            if np.any(np.diff(ms) <= 0):
                raise ParameterError("extension nodes must be strictly increasing")
            if np.any(vs <= 0):
                raise ParameterError("extension values must be strictly positive")
            edge = self.c * self.m0**self.alpha
            if abs(vs[0] - edge) > 1e-12 * max(1.0, edge):
                raise ParameterError(
                    f"extension must be continuous at m0: phi(m0)={edge}, table starts at {vs[0]}"
                )
        elif ext:
            raise ParameterError("a pure power law (m0 = 1) takes no extension table")

    def __call__(self, m):
        m = np.asarray(m, dtype=float)
        if np.any(m < 0.0) or np.any(m > 1.0) or np.any(np.isnan(m)):
            raise DomainError("phi is defined on [0, 1] only")
        out = self.c * m**self.alpha
        if self.m0 < 1.0:
            ms, vs = self._table()
            upper = m >= self.m0
            out = np.where(upper, np.interp(m, ms, vs), out)
        return out

    def _table(self):
        return (np.array([e[0] for e in self.extension]),
                np.array([e[1] for e in self.extension]))

    @property
    def phi_min(self) -> float:
        return 0.0

    @property
    def phi_max(self) -> float:
        edge = self.c * self.m0**self.alpha
        if self.m0 < 1.0:
            return float(max(edge, max(v for _, v in self.extension)))
        return float(edge)

    @property
    def dos_window(self) -> float:
        """Largest ``r`` such that every level in ``(0, r)`` is reached only inside the power-law zone."""
        edge = self.c * self.m0**self.alpha
        if self.m0 < 1.0:
            return float(min(edge, min(v for _, v in self.extension)))
        return float(edge)

    def power_preimage(self, energy, k):
        """Fiber ``m`` with ``|k| phi(m) = energy`` inside the power-law zone."""
        return (np.asarray(energy, dtype=float) / (self.c * np.abs(k))) ** (1.0 / self.alpha)


@dataclass(frozen=True)
class TabulatedProfile:
    """Piecewise-linear speed ``phi`` through ``(nodes[i], values[i])``.

    Used for non-degenerate flows (e.g. fibers restricted away from ``m = 0``),
    where only the extreme speeds matter.
    """

    nodes: tuple
    values: tuple

    def __post_init__(self):
        if len(self.nodes) != len(self.values) or len(self.nodes) < 2:
            raise ParameterError("need matching node/value tables with at least two entries")
        if any(b <= a for a, b in zip(self.nodes, self.nodes[1:])):
            raise ParameterError("profile nodes must be strictly increasing")
        if self.nodes[0] < 0 or self.nodes[-1] > 1:
            raise ParameterError("profile nodes must lie in [0, 1]")
        if any(v < 0 for v in self.values):
            raise ParameterError("flow speed must be nonnegative")

    def __call__(self, m):
        m = np.asarray(m, dtype=float)
        if np.any(m < self.nodes[0]) or np.any(m > self.nodes[-1]):
            raise DomainError(f"profile defined on [{self.nodes[0]}, {self.nodes[-1]}]")
        return np.interp(m, np.asarray(self.nodes, float), np.asarray(self.values, float))

    @property
    def phi_min(self):
        return min(self.values)

    @property
    def phi_max(self):
        return max(self.values)


def phi_eval(profile, m) -> float:
    """Speed of the flow on fiber ``m``."""
    return float(profile(float(m)))


# --------------------------------------------------------------------------- #
# Spectral parameters
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class SpectralParams:
    """Regularity ``s`` in m, ``gamma`` in theta, and degeneracy exponent ``alpha``."""

    s: float
    gamma: float
    alpha: float

    def constraint_ok(self) -> bool:
        return self.gamma + self.s / self.alpha > 0.5

    @property
    def holder_exponent(self) -> float:
        return self.s - 0.5

    @property
    def p(self) -> float:
        return 2.0 * self.s / self.alpha

    @property
    def dos_exponent(self) -> float:
        return 2.0 * self.s / self.alpha - 1.0

    @property
    def rate(self) -> float:
        return self.s / (self.s + self.alpha)

    @property
    def remainder_exponent(self) -> float:
        return 2.0 * self.gamma + 2.0 * self.s / self.alpha - 1.0

    def require_valid(self) -> "SpectralParams":
        report = validate_params(self)
        if not report.ok:
            raise ParameterError(report.message())
        return self

    def to_dict(self) -> dict:
        return {"s": self.s, "gamma": self.gamma, "alpha": self.alpha}


@dataclass(frozen=True)
class ParamReport:
    s_ok: bool
    gamma_ok: bool
    alpha_ok: bool
    constraint_value: float
    constraint_ok: bool
    p: float
    dos_exponent: float
    rate: float
    rate_from_p: float

    @property
    def ok(self) -> bool:
        return self.s_ok and self.gamma_ok and self.alpha_ok and self.constraint_ok

    def message(self) -> str:
        problems = []
        if not self.s_ok:
            problems.append("s must exceed 1/2")
        if not self.gamma_ok:
            problems.append("gamma must be nonnegative")
        if not self.alpha_ok:
            problems.append("alpha must be positive")
        if not self.constraint_ok:
            problems.append(f"constraint gamma + s/alpha > 1/2 violated ({self.constraint_value:.6g} <= 0.5)")
        return "; ".join(problems) if problems else "ok"


def validate_params(p: SpectralParams) -> ParamReport:
    """Check ``s > 1/2``, ``gamma >= 0`` and ``gamma + s/alpha > 1/2``; report exponents.

    ``rate_from_p`` is ``p / (2 + p)`` with ``p = 2 s / alpha`` and agrees with
    ``rate = s / (s + alpha)``.
    """
    alpha_ok = p.alpha > 0
    if not alpha_ok:
        nan = float("nan")
        return ParamReport(p.s > 0.5, p.gamma >= 0, False, nan, False, nan, nan, nan, nan)
    pp = p.p
    return ParamReport(
        s_ok=p.s > 0.5,
        gamma_ok=p.gamma >= 0,
        alpha_ok=True,
        constraint_value=p.gamma + p.s / p.alpha,
        constraint_ok=p.constraint_ok(),
        p=pp,
        dos_exponent=pp - 1.0,
        rate=p.rate,
        rate_from_p=pp / (2.0 + pp),
    )


# --------------------------------------------------------------------------- #
# m-grids
# --------------------------------------------------------------------------- #

@dataclass(frozen=True, eq=False)
class MGrid:
    """Composite Gauss-Legendre rule on [0, 1], panels graded toward ``m = 0``."""

    nodes: np.ndarray
    weights: np.ndarray
    edges: np.ndarray
    grading: float
    order: int

    def __post_init__(self):
        for arr in (self.nodes, self.weights, self.edges):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.nodes)

    @property
    def panels(self) -> int:
        return len(self.edges) - 1

    def integrate(self, values, axis: int = 0):
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=([0], [axis]))

    def metadata(self) -> dict:
        return {"panels": self.panels, "grading": self.grading, "order": self.order}


def make_mgrid(n: int, grading: float = 1.0, order: int = 4) -> MGrid:
    """``n`` Gauss-Legendre panels of ``order`` points with edges ``(j/n)**grading``."""
    if int(n) != n or n < 1 or order < 1 or n * order < 2:
        raise ParameterError(f"grid needs at least two nodes (n={n}, order={order})")
    if grading < 1:
        raise ParameterError(f"grading must be >= 1, got {grading}")
    edges = (np.arange(n + 1) / n) ** grading
    edges[-1] = 1.0
    nodes, weights = panel_rule(edges, order)
    return MGrid(nodes, weights, edges, float(grading), int(order))


# --------------------------------------------------------------------------- #
# Mode descriptors: closed forms m -> f_hat_m(k)
# --------------------------------------------------------------------------- #

class ModeFunction:
    """Coefficient map ``m -> (f_hat_m(-kmax), ..., f_hat_m(kmax))``."""

    kmax: int

    def evaluate(self, m) -> np.ndarray:
        """Coefficients at points ``m`` (1-D), shape ``(len(m), 2*kmax + 1)``."""
        raise NotImplementedError

    def modes(self, ks, m) -> np.ndarray:
        """Coefficient of mode ``ks[i]`` at the points ``m[i]``.

        ``ks`` has shape ``(K,)``; ``m`` has shape ``(K,)`` or ``(K, n)``.
        """
        ks = np.asarray(ks, dtype=int)
        m = np.asarray(m, dtype=float)
        out = np.empty(m.shape, dtype=complex)
        for i, k in enumerate(ks):
            row = np.atleast_1d(m[i])
            out[i] = self.evaluate(row)[:, k + self.kmax].reshape(np.shape(m[i]))
        return out

    def populated(self) -> np.ndarray:
        ks = np.arange(-self.kmax, self.kmax + 1)
        return ks[ks != 0]


@dataclass(frozen=True, eq=False)
class SeparableModes(ModeFunction):
    """``f_hat_m(k_j) = amp_j * env_j(m) * (1 + mod_amp_j sin(2 pi mod_freq_j m + mod_phase_j))``.

    ``env_j(m) = m**beta_j`` for the power shape, or a smooth compactly
    supported bump ``exp(1 - 1/(1 - t**2))``, ``t = (m - center)/width``.
    """

    kmax: int
    ks: np.ndarray
    amps: np.ndarray
    betas: np.ndarray
    mod_amp: np.ndarray = None
    mod_freq: np.ndarray = None
    mod_phase: np.ndarray = None
    shape: str = "power"
    center: float = 0.5
    width: float = 0.25

    def __post_init__(self):
        n = len(self.ks)
        ks = np.asarray(self.ks, dtype=int)
        if np.any(ks == 0):
            raise ParameterError("mode k = 0 is excluded: fibers are mean-free")
        if np.any(np.abs(ks) > self.kmax):
            raise ParameterError("mode index exceeds kmax")
        if len(np.unique(ks)) != n:
            raise ParameterError("duplicate mode indices")
        betas = np.broadcast_to(np.asarray(self.betas, dtype=float), (n,)).copy()
        if np.any(betas < 0):
            raise ParameterError("power exponents must be nonnegative")
        zeros = np.zeros(n)
        fields_ = {
            "ks": ks,
            "amps": np.broadcast_to(np.asarray(self.amps, dtype=complex), (n,)).copy(),
            "betas": betas,
            "mod_amp": zeros.copy() if self.mod_amp is None else np.asarray(self.mod_amp, float),
            "mod_freq": zeros.copy() if self.mod_freq is None else np.asarray(self.mod_freq, float),
            "mod_phase": zeros.copy() if self.mod_phase is None else np.asarray(self.mod_phase, float),
        }
        for name, value in fields_.items():
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        if self.shape not in ("power", "bump"):
            raise ParameterError(f"unknown envelope shape {self.shape!r}")

    def _envelope(self, m, j=slice(None)):
        # m: (..., n) broadcast against per-mode parameters on the last axis
        if self.shape == "power":
            return m ** self.betas[j]
        t = (m - self.center) / self.width
        inside = np.abs(t) < 1.0
        tt = np.where(inside, t, 0.0)
        return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - tt**2)), 0.0)

    def _amplitude(self, m, j=slice(None)):
        env = self._envelope(m, j)
        mod = 1.0 + self.mod_amp[j] * np.sin(2 * np.pi * self.mod_freq[j] * m + self.mod_phase[j])
        return self.amps[j] * env * mod

    def evaluate(self, m):
        m = np.asarray(m, dtype=float).reshape(-1)
        out = np.zeros((len(m), 2 * self.kmax + 1), dtype=complex)
        if len(self.ks):
            out[:, self.ks + self.kmax] = self._amplitude(m[:, None])
        return out

    def modes(self, ks, m):
        ks = np.asarray(ks, dtype=int)
        m = np.asarray(m, dtype=float)
        lookup = {int(k): j for j, k in enumerate(self.ks)}
        out = np.zeros(m.shape, dtype=complex)
        for i, k in enumerate(ks):
            j = lookup.get(int(k))
            if j is not None:
                out[i] = self._amplitude(m[i], j)
        return out

    def populated(self):
        return self.ks[self.amps != 0]


@dataclass(frozen=True, eq=False)
class CombinedModes(ModeFunction):
    """Linear combination ``sum_j coef_j * F_j`` of mode functions."""

    kmax: int
    terms: tuple

    def evaluate(self, m):
        m = np.asarray(m, dtype=float).reshape(-1)
        out = np.zeros((len(m), 2 * self.kmax + 1), dtype=complex)
        for coef, fn in self.terms:
            out += coef * fn.evaluate(m)
        return out

    def modes(self, ks, m):
        return sum(coef * fn.modes(ks, m) for coef, fn in self.terms)

    def populated(self):
        ks = [fn.populated() for _, fn in self.terms]
        return np.unique(np.concatenate(ks)) if ks else np.array([], dtype=int)


@dataclass(frozen=True, eq=False)
class MultipliedModes(ModeFunction):
    """``f_hat_m(k) * multiplier(m, k)`` for a diagonal Fourier multiplier."""

    kmax: int
    base: ModeFunction
    multiplier: Any

    def evaluate(self, m):
        m = np.asarray(m, dtype=float).reshape(-1)
        ks = np.arange(-self.kmax, self.kmax + 1)
        return self.base.evaluate(m) * self.multiplier(m[:, None], ks[None, :])

    def modes(self, ks, m):
        ks = np.asarray(ks, dtype=int)
        m = np.asarray(m, dtype=float)
        kb = ks[:, None] if m.ndim == 2 else ks
        return self.base.modes(ks, m) * self.multiplier(m, kb)

    def populated(self):
        return self.base.populated()


class InterpolatedModes(ModeFunction):
    """Off-grid coefficients from tabulated data.

    Monotone cubic (PCHIP) interpolation between grid nodes. Below the first
    node the Hölder model ``f_0 + C m**h`` is fitted through the two smallest
    nodes, which also supplies the value on the ``m = 0`` fiber. Above the last
    node PCHIP extrapolates to ``m = 1``.
    """

    def __init__(self, nodes, coeffs, holder_exponent: float):
        self.kmax = (coeffs.shape[1] - 1) // 2
        self.nodes = np.asarray(nodes, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.h = float(holder_exponent)
        if self.h <= 0:
            raise ParameterError("Hölder exponent for extrapolation must be positive")
        self._re = PchipInterpolator(self.nodes, self.coeffs.real, axis=0, extrapolate=True)
        self._im = PchipInterpolator(self.nodes, self.coeffs.imag, axis=0, extrapolate=True)
        m1, m2 = self.nodes[0], self.nodes[1]
        v1, v2 = self.coeffs[0], self.coeffs[1]
        self._slope = (v2 - v1) / (m2**self.h - m1**self.h)
        self.f0 = v1 - self._slope * m1**self.h

    def evaluate(self, m):
        m = np.asarray(m, dtype=float).reshape(-1)
        out = self._re(m) + 1j * self._im(m)
        low = m < self.nodes[0]
        if np.any(low):
            out[low] = self.f0[None, :] + self._slope[None, :] * m[low, None] ** self.h
        return out

    def populated(self):
        ks = np.arange(-self.kmax, self.kmax + 1)
        return ks[np.any(self.coeffs != 0, axis=0)]


# --------------------------------------------------------------------------- #
# Fibered functions
# --------------------------------------------------------------------------- #

class FiberedFunction:
    """Mean-free function on the annulus, stored by Fourier coefficients per fiber.

    Parameters
    ----------
    grid : MGrid
        Fibers at which coefficients are tabulated.
    kmax : int
        Modes ``-kmax..kmax`` are stored; column ``k + kmax`` holds mode ``k``.
    coeffs : array_like, shape (len(grid), 2*kmax + 1)
        Tabulated coefficients. Column ``k = 0`` must vanish.
    descriptor : ModeFunction, optional
        Closed form of the coefficients for exact off-grid evaluation.
    """

    __slots__ = ("grid", "kmax", "coeffs", "descriptor")

    def __init__(self, grid: MGrid, kmax: int, coeffs, descriptor: ModeFunction | None = None):
        if int(kmax) != kmax or kmax < 1:
            raise ParameterError(f"kmax must be a positive integer, got {kmax}")
        coeffs = np.array(coeffs, dtype=complex)
        if coeffs.shape != (len(grid), 2 * kmax + 1):
            raise ParameterError(f"coeffs must have shape {(len(grid), 2 * kmax + 1)}, got {coeffs.shape}")
        if np.any(coeffs[:, kmax] != 0):
            raise ParameterError("k = 0 coefficients must vanish (fibers are mean-free)")
        if descriptor is not None:
            if descriptor.kmax != kmax:
                raise ParameterError("descriptor kmax does not match")
            ref = descriptor.evaluate(grid.nodes)
            scale = max(1.0, float(np.max(np.abs(ref), initial=0.0)))
            if np.max(np.abs(ref - coeffs), initial=0.0) > 1e-12 * scale:
                raise ParameterError("tabulated coefficients disagree with the closed-form descriptor")
        coeffs.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "kmax", int(kmax))
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "descriptor", descriptor)

    def __setattr__(self, name, value):
        raise AttributeError("FiberedFunction is immutable")

    def __repr__(self):
        kind = type(self.descriptor).__name__ if self.descriptor is not None else "tabulated"
        return f"FiberedFunction(nodes={len(self.grid)}, kmax={self.kmax}, {kind})"

    @classmethod
    def _trusted(cls, grid, kmax, coeffs, descriptor=None) -> "FiberedFunction":
        # skips validation; for coefficient maps that preserve the invariants
        obj = object.__new__(cls)
        coeffs = np.asarray(coeffs, dtype=complex)
        coeffs.setflags(write=False)
        for name, value in (("grid", grid), ("kmax", kmax), ("coeffs", coeffs), ("descriptor", descriptor)):
            object.__setattr__(obj, name, value)
        return obj

    @classmethod
    def from_modes(cls, grid: MGrid, descriptor: ModeFunction) -> "FiberedFunction":
        return cls(grid, descriptor.kmax, descriptor.evaluate(grid.nodes), descriptor)

    @classmethod
    def zeros(cls, grid: MGrid, kmax: int) -> "FiberedFunction":
        empty = SeparableModes(kmax, np.array([], dtype=int), np.array([], dtype=complex), np.array([]))
        return cls.from_modes(grid, empty)

    @classmethod
    def from_theta_samples(cls, grid: MGrid, samples, kmax: int):
        """Split equispaced theta samples into the mean-free part and the fiber means.

        ``samples[i, j]`` is ``f(m_i, 2 pi j / n)``. Returns ``(f - Pf, means)``
        where ``means[i]`` is the average of fiber ``i``.
        """
        samples = np.asarray(samples)
        n = samples.shape[1]
        if n < 2 * kmax + 1:
            raise ParameterError("need at least 2*kmax + 1 theta samples")
        # orthonormal basis: f_hat(k) = sqrt(2 pi) / n * sum_j f_j e^{-ik theta_j}
        spec = np.fft.fft(samples, axis=1) * np.sqrt(2 * np.pi) / n
        ks = np.arange(-kmax, kmax + 1)
        coeffs = spec[:, ks % n]
        means = coeffs[:, kmax].real / np.sqrt(2 * np.pi)
        coeffs[:, kmax] = 0.0
        return cls(grid, kmax, coeffs), means

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.kmax, self.kmax + 1)

    def column(self, k: int) -> np.ndarray:
        return self.coeffs[:, k + self.kmax]

    def populated(self) -> np.ndarray:
        ks = self.ks
        return ks[np.any(self.coeffs != 0, axis=0)]

    def evaluator(self, holder_exponent: float = 0.25) -> ModeFunction:
        """Closed form when available, else an interpolant of the tabulated data."""
        if self.descriptor is not None:
            return self.descriptor
        return InterpolatedModes(self.grid.nodes, self.coeffs, holder_exponent)

    def fiber_at_zero(self, holder_exponent: float = 0.25) -> np.ndarray:
        return self.evaluator(holder_exponent).evaluate(np.array([0.0]))[0]

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.integrate(np.sum(np.abs(self.coeffs) ** 2, axis=1))))

    def inner(self, other: "FiberedFunction") -> complex:
        """``(self, other)_{L^2}`` by the grid quadrature (linear in ``self``)."""
        self._check_compatible(other)
        return complex(self.grid.integrate(np.sum(self.coeffs * np.conj(other.coeffs), axis=1)))

    def with_coeffs(self, coeffs, descriptor: ModeFunction | None = None) -> "FiberedFunction":
        return FiberedFunction(self.grid, self.kmax, coeffs, descriptor)

    def _check_compatible(self, other):
        if not isinstance(other, FiberedFunction):
            raise TypeError("expected a FiberedFunction")
        if other.grid is not self.grid and not (
            len(other.grid) == len(self.grid) and np.array_equal(other.grid.nodes, self.grid.nodes)
        ):
            raise ParameterError("fibered functions live on different grids")
        if other.kmax != self.kmax:
            raise ParameterError("fibered functions have different kmax")

    def _combine(self, other, a, b):
        self._check_compatible(other)
        desc = None
        if self.descriptor is not None and other.descriptor is not None:
            desc = CombinedModes(self.kmax, ((a, self.descriptor), (b, other.descriptor)))
        return FiberedFunction(self.grid, self.kmax, a * self.coeffs + b * other.coeffs, desc)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        desc = None if self.descriptor is None else CombinedModes(self.kmax, ((scalar, self.descriptor),))
        return FiberedFunction(self.grid, self.kmax, scalar * self.coeffs, desc)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


# --------------------------------------------------------------------------- #
# Experiment records
# --------------------------------------------------------------------------- #

RECORD_KINDS = ("rate-sample", "dos-sample", "toy-sample", "norm-report")


def _encode_number(value):
    if value is None:
        return None
    if isinstance(value, complex) or np.iscomplexobj(value):
        value = complex(value)
        return {"re": value.real, "im": value.imag}
    return float(value)


def _decode_number(value):
    if isinstance(value, dict):
        return complex(value["re"], value["im"])
    return value


@dataclass(frozen=True)
class ExperimentRecord:
    """One sample of an experiment with enough provenance to reproduce it."""

    kind: str
    params: SpectralParams
    abscissa: float
    value: Any
    oracle_value: Any = None
    grid: dict = field(default_factory=dict)
    kmax: int | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in RECORD_KINDS:
            raise ParameterError(f"unknown record kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parameters": {
                **self.params.to_dict(),
                "grid": dict(self.grid),
                "kmax": self.kmax,
                "seed": self.seed,
            },
            "abscissa": float(self.abscissa),
            "value": _encode_number(self.value),
            "oracle_value": _encode_number(self.oracle_value),
            "extra": dict(self.extra),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentRecord":
        par = data["parameters"]
        return cls(
            kind=data["kind"],
            params=SpectralParams(par["s"], par["gamma"], par["alpha"]),
            abscissa=data["abscissa"],
            value=_decode_number(data["value"]),
            oracle_value=_decode_number(data.get("oracle_value")),
            grid=dict(par.get("grid", {})),
            kmax=par.get("kmax"),
            seed=par.get("seed"),
            extra=dict(data.get("extra", {})),
        )
