import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from degenflow import FlowProfile, make_mgrid, make_separable
from degenflow.core import FiberedFunction, MGrid, ParameterError, SeparableModes
from degenflow.evolution import (error_norm, flow, mode_energies, project_mean, sinc, time_average,
                                 time_average_oracle)

# int_0^1 m sinc^2(100 m) dm = 100^-2 int_0^100 sin^2(x)/x dx, 30-digit quadrature
ERR_SQ_T100 = 2.939955738771299e-4


def single_node_grid(m):
    return MGrid(np.array([m]), np.array([1.0]), np.array([0.0, 1.0]), 1.0, 1)


def test_sinc_series_branch():
    x = np.array([0.0, 1e-5, -1e-5, 1e-3, 2.0])
    np.testing.assert_allclose(sinc(x), [1.0, *(np.sin(x[1:]) / x[1:])], rtol=1e-15)


def test_flow_identity_and_half_turn():
    g = single_node_grid(1.0)
    f = make_separable(1, 1.0, g)
    np.testing.assert_array_equal(flow(f, FlowProfile(1.0), 0.0).coeffs, f.coeffs)
    np.testing.assert_allclose(flow(f, FlowProfile(1.0), np.pi).column(1), -f.column(1), atol=1e-15)


def test_time_average_multiplier():
    f = make_separable(1, 1.0, single_node_grid(1.0))
    out = time_average(f, FlowProfile(1.0), np.pi / 2)
    assert out.column(1)[0] == pytest.approx(2 / np.pi, rel=1e-15)


def test_time_average_zero_at_sinc_root():
    f = make_separable(2, 1.0, single_node_grid(0.5))
    res = error_norm(f, FlowProfile(1.0), np.pi, quadrature="grid")
    assert res.error_l2 == pytest.approx(0.0, abs=1e-15)


def test_project_mean(small_ensemble):
    f = small_ensemble[0]
    pf = project_mean(f)
    assert not np.any(pf.coeffs)
    assert not np.any(project_mean(pf).coeffs)
    assert (f - pf).inner(pf) == 0


def test_error_norm_quadrature_oracle():
    f = make_separable(1, 0.5, make_mgrid(16, 2.0, 4))
    res = error_norm(f, FlowProfile(1.0), 100.0)
    assert res.quadrature == "continuum"
    assert res.error_l2 == pytest.approx(np.sqrt(ERR_SQ_T100), abs=1e-6)


@pytest.mark.parametrize("T", [1.0, 10.0, 1e3, 1e5])
def test_continuum_matches_direct_integral(T):
    # int_0^1 m^1.4 sinc^2(2T m^1.5) dm = (2/3) (2T)^-1.6 int_0^{2T} x^-1.4 sin^2 x dx,
    # the latter summed over pi-wide panels
    from scipy.integrate import quad
    X = 2 * T
    edges = np.concatenate([[0.0], np.arange(np.pi, X, np.pi), [X]])
    parts = [quad(lambda x: x**-1.4 * np.sin(x) ** 2, a, b, epsabs=0, epsrel=1e-13)[0]
             for a, b in zip(edges[:-1], edges[1:])]
    ref = (2 / 3) * X**-1.6 * np.sum(parts[::-1])
    f = make_separable(2, 0.7, make_mgrid(8, 2.0, 4))
    assert error_norm(f, FlowProfile(1.5), T).error_l2 == pytest.approx(np.sqrt(ref), rel=1e-7)


def test_continuum_with_tabulated_zone():
    prof = FlowProfile(1.0, m0=0.5, extension=((0.5, 0.5), (0.75, 0.9), (1.0, 1.2)))
    f = make_separable(1, 1.0, make_mgrid(64, 1.0, 8))
    for T in (0.5, 3.0):
        assert error_norm(f, prof, T).error_l2 == pytest.approx(
            error_norm(f, prof, T, quadrature="grid").error_l2, rel=1e-8)


def test_mode_energies_sum(small_ensemble, profile):
    f = small_ensemble[1]
    ks, en = mode_energies(f, profile, 2.0)
    assert len(ks) == 16 and np.all(en >= 0)
    assert np.sqrt(en.sum()) == pytest.approx(error_norm(f, profile, 2.0).error_l2, rel=1e-14)


@pytest.mark.parametrize("T", [1.0, 5.0, 20.0])
def test_oracle_equivalence(T, profile):
    from degenflow import EnsembleSpec, SpectralParams, make_random
    f = make_random(EnsembleSpec(SpectralParams(0.75, 0.0, 1.0), kmax=8, count=1, seed=3, mgrid=64))[0]
    diff = time_average(f, profile, T).coeffs - time_average_oracle(f, profile, T).coeffs
    assert np.max(np.abs(diff)) < 1e-8


def test_invalid_T(small_ensemble, profile):
    with pytest.raises(ParameterError):
        time_average(small_ensemble[0], profile, 0.0)
    with pytest.raises(ParameterError):
        error_norm(small_ensemble[0], profile, -1.0)


def test_strong_convergence(small_ensemble, profile):
    for f in small_ensemble:
        errs = [error_norm(f, profile, 10.0**j).error_l2 for j in range(5)]
        assert np.all(np.diff(errs) < 0)
        assert errs[-1] < 0.05 * errs[0]


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_group_law_unitarity(t1, t2):
    g = make_mgrid(4, 2.0, 4)
    d = SeparableModes(3, np.array([-3, 1, 2]), np.array([1.0, 0.5j, -0.2]), np.array([0.4, 1.0, 2.0]))
    f = FiberedFunction.from_modes(g, d)
    prof = FlowProfile(0.7, 1.3)
    a = flow(flow(f, prof, t1), prof, t2).coeffs
    np.testing.assert_allclose(a, flow(f, prof, t1 + t2).coeffs, atol=1e-12)
    assert flow(f, prof, t1).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-12)
