"""Test functions with controlled regularity for the experiments.

Families
--------
separable-extremal
    ``f_hat_m(k) = m**(s - 1/2)`` on one mode: the equality case of the
    Hölder decay bound. It sits on the boundary of the space (the seminorm
    diverges logarithmically), so it is used unnormalised.
random-decay
    ``f_hat_m(k) = zeta_k |k|**(-gamma - 1/2 - eps) m**(s - 1/2 + eps') (1 + rho sin(2 pi nu m + phi))``
    with unit ``zeta_k`` and ``eps = eps' = 0.05`` so every member has a
    finite norm.
smooth-bump
    Compactly supported smooth bumps in m away from ``m = 0``, random
    phases and the same ``|k|`` decay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FiberedFunction, MGrid, ParameterError, SeparableModes, SpectralParams, make_mgrid
from .sobolev import full_norm

FAMILIES = ("separable-extremal", "random-decay", "smooth-bump")
EPS_K = 0.05
EPS_M = 0.05


@dataclass(frozen=True)
class EnsembleSpec:
    params: SpectralParams
    kmax: int = 32
    count: int = 16
    seed: int = 7
    family: str = "random-decay"
    mgrid: int = 128
    grading: float = 2.0
    order: int = 4

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.count < 0:
            raise ParameterError("ensemble count must be nonnegative")
        if int(self.kmax) != self.kmax or self.kmax < 1:
            raise ParameterError("kmax must be a positive integer")

    def grid(self) -> MGrid:
        """``mgrid`` nodes in total: ``mgrid / order`` graded panels."""
        return make_mgrid(max(1, self.mgrid // self.order), self.grading, self.order)

    def to_dict(self) -> dict:
        return {**self.params.to_dict(), "kmax": self.kmax, "count": self.count, "seed": self.seed,
                "family": self.family, "mgrid": self.mgrid, "grading": self.grading, "order": self.order}


def make_separable(k: int, beta: float, grid: MGrid, kmax: int | None = None, amp: complex = 1.0
                   ) -> FiberedFunction:
    """Single mode ``f_hat_m(k) = amp * m**beta`` with a closed-form descriptor."""
    if int(k) != k or k == 0:
        raise ParameterError("mode k must be a nonzero integer (fibers are mean-free)")
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    kmax = abs(int(k)) if kmax is None else int(kmax)
    desc = SeparableModes(kmax, np.array([int(k)]), np.array([amp], dtype=complex), np.array([float(beta)]))
    return FiberedFunction.from_modes(grid, desc)


def member_seed(seed: int, j: int) -> int:
    return int(seed) ^ int(j)


def _random_member(spec: EnsembleSpec, grid: MGrid, j: int) -> FiberedFunction:
    p, kmax = spec.params, spec.kmax
    rng = np.random.default_rng(member_seed(spec.seed, j))
    ks = np.concatenate((np.arange(-kmax, 0), np.arange(1, kmax + 1)))
    n = len(ks)
    zeta = np.exp(2j * np.pi * rng.random(n))
    rho = rng.random(n)
    nu = rng.uniform(0.5, 3.0, n)
    phase = rng.uniform(0.0, 2 * np.pi, n)
    amps = zeta * np.abs(ks) ** (-p.gamma - 0.5 - EPS_K)
    if spec.family == "random-decay":
        desc = SeparableModes(kmax, ks, amps, np.full(n, p.s - 0.5 + EPS_M),
                              0.5 * rho, nu, phase)
    else:
        center = rng.uniform(0.35, 0.65)
        desc = SeparableModes(kmax, ks, amps, np.zeros(n), 0.5 * rho, nu, phase,
                              shape="bump", center=center, width=0.3)
    return FiberedFunction.from_modes(grid, desc)


def make_random(spec: EnsembleSpec, grid: MGrid | None = None) -> list[FiberedFunction]:
    """Members ``j = 0..count-1`` of the spec's family; member ``j`` is seeded by ``seed ^ j``."""
    if not spec.params.constraint_ok():
        raise ParameterError("constraint gamma + s/alpha > 1/2 violated")
    grid = spec.grid() if grid is None else grid
    if spec.family == "separable-extremal":
        return [make_separable(1, spec.params.s - 0.5, grid, spec.kmax) for _ in range(spec.count)]
    return [_random_member(spec, grid, j) for j in range(spec.count)]


def normalize(f: FiberedFunction, p: SpectralParams, **kwargs) -> tuple[FiberedFunction, float]:
    """``(f / ||f||_{s,gamma}, ||f||_{s,gamma})``.

    Raises ``NotInSpaceError`` for members of infinite norm and
    ``ParameterError`` for the zero function.
    """
    norm = full_norm(f, p, **kwargs).norm
    if norm == 0.0:
        raise ParameterError("cannot normalise the zero function")
    return f * (1.0 / norm), norm
