import json

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from degenflow.core import (DomainError, ExperimentRecord, FiberedFunction, FlowProfile, ParameterError,
                            SeparableModes, SpectralParams, TabulatedProfile, make_mgrid, phi_eval,
                            validate_params)
from degenflow.sobolev import fiber_norms_sq


class TestFlowProfile:
    def test_power_law(self):
        prof = FlowProfile(2.0, c=3.0)
        assert phi_eval(prof, 0.5) == pytest.approx(0.75)
        assert prof.phi_min == 0.0 and prof.phi_max == 3.0

    def test_extension_continuous(self):
        prof = FlowProfile(1.0, m0=0.5, extension=((0.5, 0.5), (1.0, 0.8)))
        assert phi_eval(prof, 0.75) == pytest.approx(0.65)
        assert prof.dos_window == 0.5 and prof.phi_max == 0.8

    @pytest.mark.parametrize("kwargs", [
        dict(alpha=0.0), dict(alpha=-1.0), dict(alpha=1.0, c=0.0), dict(alpha=1.0, m0=0.5),
        dict(alpha=1.0, m0=0.5, extension=((0.5, 0.4), (1.0, 1.0))),
        dict(alpha=1.0, m0=0.5, extension=((0.6, 0.6), (1.0, 1.0))),
        dict(alpha=1.0, extension=((0.5, 0.5), (1.0, 1.0))),
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ParameterError):
            FlowProfile(**kwargs)

    def test_domain(self):
        with pytest.raises(DomainError):
            FlowProfile(1.0)(1.5)

    @given(st.floats(0.1, 4.0), st.floats(0.1, 5.0), st.lists(st.floats(0, 1), min_size=2, max_size=20))
    def test_monotone(self, alpha, c, ms):
        ms = np.sort(ms)
        assert np.all(np.diff(FlowProfile(alpha, c)(ms)) >= 0)


def test_tabulated_profile_exact():
    from fractions import Fraction as F
    prof = TabulatedProfile((F(1, 2), F(1)), (F(1, 2), F(1)))
    assert prof.phi_min == F(1, 2) and prof.phi_max == 1
    with pytest.raises(DomainError):
        prof(0.25)


class TestParams:
    def test_report(self):
        rep = validate_params(SpectralParams(0.75, 0.0, 1.0))
        assert rep.ok and rep.rate == pytest.approx(3 / 7) and rep.dos_exponent == pytest.approx(0.5)
        assert rep.rate_from_p == pytest.approx(rep.rate, abs=1e-15)

    @pytest.mark.parametrize("s,gamma,alpha,bad", [
        (0.4, 0.0, 1.0, "s must exceed"),
        (0.75, -0.1, 1.0, "gamma must be"),
        (0.75, 0.0, 2.0, "constraint"),
        (0.75, 0.0, 0.0, "alpha must be"),
    ])
    def test_invalid(self, s, gamma, alpha, bad):
        rep = validate_params(SpectralParams(s, gamma, alpha))
        assert not rep.ok and bad in rep.message()
        with pytest.raises(ParameterError):
            SpectralParams(s, gamma, alpha).require_valid()

    def test_boundary_constraint_is_strict(self):
        assert not SpectralParams(0.75, 0.125, 2.0).constraint_ok()

    def test_rate_identity_symbolic(self):
        s, a = sp.symbols("s alpha", positive=True)
        p = 2 * s / a
        assert sp.simplify(p / (2 + p) - s / (s + a)) == 0


class TestGrid:
    @given(st.integers(1, 1024), st.floats(1.0, 4.0), st.integers(2, 8))
    def test_nodes_and_weights(self, n, grading, order):
        g = make_mgrid(n, grading, order)
        assert len(g) == n * order
        assert np.all(g.weights > 0)
        assert np.all((g.nodes > 0) & (g.nodes < 1)) and np.all(np.diff(g.nodes) > 0)
        assert g.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_large_grid(self):
        g = make_mgrid(4096, 4.0, 1)
        assert len(g) == 4096 and np.all(g.weights > 0)

    @pytest.mark.parametrize("n,grading", [(0, 1.0), (1.5, 1.0), (4, 0.5)])
    def test_rejects(self, n, grading):
        with pytest.raises(ParameterError):
            make_mgrid(n, grading)

    def test_graded_polynomial_exactness(self):
        g = make_mgrid(8, 3.0, 4)
        assert g.integrate(g.nodes**7) == pytest.approx(1 / 8, rel=1e-14)

    def test_immutable(self):
        g = make_mgrid(4)
        with pytest.raises(ValueError):
            g.nodes[0] = 0.5


class TestFiberedFunction:
    def test_k0_rejected(self, grid):
        coeffs = np.zeros((len(grid), 3), complex)
        coeffs[:, 1] = 1.0
        with pytest.raises(ParameterError):
            FiberedFunction(grid, 1, coeffs)
        with pytest.raises(ParameterError):
            SeparableModes(2, np.array([0]), np.array([1.0]), np.array([1.0]))

    def test_descriptor_mismatch(self, grid):
        d = SeparableModes(1, np.array([1]), np.array([1.0]), np.array([1.0]))
        with pytest.raises(ParameterError):
            FiberedFunction(grid, 1, np.zeros((len(grid), 3)), d)

    def test_immutable(self, small_ensemble):
        f = small_ensemble[0]
        with pytest.raises(AttributeError):
            f.kmax = 3
        with pytest.raises(ValueError):
            f.coeffs[0, 0] = 1.0

    def test_parseval(self, small_ensemble):
        for f in small_ensemble:
            direct = f.grid.integrate(fiber_norms_sq(f.coeffs, 0.0))
            assert f.l2_norm() ** 2 == pytest.approx(direct, rel=1e-12)
            assert f.inner(f).real == pytest.approx(direct, rel=1e-12)

    def test_theta_samples_split(self, grid):
        theta = 2 * np.pi * np.arange(16) / 16
        m = grid.nodes[:, None]
        samples = 3.0 * m + m**2 * np.cos(theta) + np.sin(2 * theta)
        f, means = FiberedFunction.from_theta_samples(grid, samples, kmax=3)
        np.testing.assert_allclose(means, 3.0 * grid.nodes, atol=1e-13)
        # cos = (e^{i} + e^{-i})/2 in the orthonormal basis: coefficient sqrt(2 pi)/2
        np.testing.assert_allclose(f.column(1), np.sqrt(2 * np.pi) / 2 * grid.nodes**2, atol=1e-13)
        np.testing.assert_allclose(f.column(-2), 1j * np.sqrt(2 * np.pi) / 2, atol=1e-13)

    def test_arithmetic_keeps_descriptor(self, small_ensemble):
        f, g = small_ensemble[:2]
        h = 2.0 * f - g
        np.testing.assert_allclose(h.coeffs, 2 * f.coeffs - g.coeffs)
        np.testing.assert_allclose(h.descriptor.evaluate(np.array([0.3])),
                                   2 * f.descriptor.evaluate(np.array([0.3])) - g.descriptor.evaluate(np.array([0.3])))

    def test_interpolated_evaluator(self, grid):
        d = SeparableModes(1, np.array([1]), np.array([1.0]), np.array([0.25]))
        f = FiberedFunction(grid, 1, d.evaluate(grid.nodes))
        ev = f.evaluator(0.25)
        m = np.array([0.0, 1e-4, 0.37, 1.0])
        np.testing.assert_allclose(ev.evaluate(m)[:, 2], m**0.25, atol=2e-3)
        assert abs(f.fiber_at_zero(0.25)[2]) < 1e-8


def test_record_roundtrip():
    rec = ExperimentRecord("dos-sample", SpectralParams(0.75, 0.0, 1.0), 0.3, 0.5 - 0.25j, 0.5,
                           grid={"mgrid": 128}, kmax=32, seed=7, extra={"member": 2})
    back = ExperimentRecord.from_dict(json.loads(json.dumps(rec.to_dict())))
    assert back == rec
    with pytest.raises(ParameterError):
        ExperimentRecord("bogus", SpectralParams(0.75, 0.0, 1.0), 0, 0)
