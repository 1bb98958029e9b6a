"""Invariant suite: unitarity, contraction, group law, distribution monotonicity and
sesquilinearity, seeded reproducibility."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from degenflow import (EnsembleSpec, FlowProfile, SpectralParams, error_norm, flow, make_random,
                       spectral_distribution, time_average)
from degenflow.experiments import geometric_grid, rate_experiment

P = SpectralParams(0.75, 0.0, 1.0)

seeds = st.integers(0, 2**31 - 1)
alphas = st.sampled_from([0.5, 1.0, 1.5, 2.0])
times = st.floats(0.1, 1e3)


def member(seed, alpha=1.0, kmax=6):
    gamma = max(0.0, 0.5 - 0.75 / alpha) + 0.1
    return make_random(EnsembleSpec(SpectralParams(0.75, gamma, alpha), kmax=kmax, count=1, seed=seed, mgrid=32))[0]


@given(seeds, alphas, st.sampled_from([0.1, 1.0, 10.0]))
def test_unitarity(seed, alpha, t):
    f = member(seed, alpha)
    assert flow(f, FlowProfile(alpha), t).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-12)


@given(seeds, alphas, times)
def test_contraction(seed, alpha, T):
    f = member(seed, alpha)
    prof = FlowProfile(alpha)
    assert time_average(f, prof, T).l2_norm() <= f.l2_norm() * (1 + 1e-14)
    assert error_norm(f, prof, T).error_l2 <= f.l2_norm() * (1 + 1e-9)


@given(seeds, st.floats(-100, 100), st.floats(-100, 100))
def test_group_law(seed, t1, t2):
    f = member(seed)
    prof = FlowProfile(1.3, 0.7)
    np.testing.assert_allclose(flow(flow(f, prof, t1), prof, t2).coeffs, flow(f, prof, t1 + t2).coeffs,
                               atol=1e-12)


@given(seeds, st.lists(st.floats(-7, 7), min_size=2, max_size=12))
def test_distribution_monotone(seed, lams):
    f = member(seed)
    vals = [spectral_distribution(f, f, FlowProfile(1.0), x).real for x in sorted(lams)]
    assert np.all(np.diff(vals) >= -1e-14)


@given(seeds)
def test_distribution_total_variation(seed):
    f = member(seed)
    prof = FlowProfile(1.0)
    top = spectral_distribution(f, f, prof, f.kmax * prof.phi_max).real
    bottom = spectral_distribution(f, f, prof, -f.kmax * prof.phi_max - 1.0).real
    assert top - bottom == pytest.approx(f.l2_norm() ** 2, rel=1e-12)


@given(seeds, st.complex_numbers(max_magnitude=5), st.floats(-5, 5))
def test_distribution_sesquilinear(seed, a, lam):
    f, g, h = make_random(EnsembleSpec(P, kmax=5, count=3, seed=seed, mgrid=32))
    prof = FlowProfile(1.0)
    lhs = spectral_distribution(a * f + g, h, prof, lam)
    rhs = a * spectral_distribution(f, h, prof, lam) + spectral_distribution(g, h, prof, lam)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(a))
    assert abs(spectral_distribution(h, a * f, prof, lam) - np.conj(a) * spectral_distribution(h, f, prof, lam)) \
        <= 1e-12 * (1 + abs(a))


@given(seeds)
def test_seeded_reproducibility(seed):
    spec = EnsembleSpec(P, kmax=4, count=2, seed=seed, mgrid=16)
    a, b = make_random(spec), make_random(spec)
    assert all(np.array_equal(x.coeffs, y.coeffs) for x, y in zip(a, b))
    T = geometric_grid(1, 1e3, 5)
    assert rate_experiment(a, FlowProfile(1.0), P, T) == rate_experiment(b, FlowProfile(1.0), P, T)
