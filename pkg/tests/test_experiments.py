import numpy as np
import pytest

from degenflow import FlowProfile, SpectralParams, make_mgrid, make_separable
from degenflow.core import FiberedFunction, ParameterError
from degenflow.experiments import (RateFit, alpha_sweep, default_gamma, envelope_check, geometric_grid,
                                   rate_experiment)

P = SpectralParams(0.75, 0.0, 1.0)
T_GRID = geometric_grid(1.0, 1e4, 25)


def synthetic(slope, C=0.3):
    T = geometric_grid(10, 1e4, 13)
    return RateFit(tuple(zip(T, C * T**slope)), slope, C, (10.0, 1e4), 0.0, -3 / 7)


def test_extremal_single_function_rate(grid):
    fit = rate_experiment([make_separable(1, 0.25, grid)], FlowProfile(1.0), P, T_GRID)
    assert fit.fitted_slope == pytest.approx(-0.75, abs=0.1)
    assert fit.window == (pytest.approx(10.0, rel=0.2), 1e4)
    assert envelope_check(fit, -P.rate, 0.15).passed


def test_contraction(small_ensemble, profile):
    fs = [f * (1.0 / f.l2_norm()) for f in small_ensemble]
    fit = rate_experiment(fs, profile, P, T_GRID)
    assert np.all(fit.sup_error <= 1.0 + 1e-12)


def test_degenerate(grid, profile):
    zero = FiberedFunction.zeros(grid, 2)
    fit = rate_experiment([zero, zero], profile, P, T_GRID)
    assert fit.degenerate and "degenerate" in fit.note and np.isnan(fit.fitted_slope)
    with pytest.raises(ParameterError):
        envelope_check(fit, -0.4, 0.1)
    with pytest.raises(ParameterError):
        rate_experiment([], profile, P, T_GRID)


@pytest.mark.parametrize("slope,predicted,tol,expected", [
    (-0.75, -0.4286, 0.0, True),
    (-0.4286, -0.4286, 1e-6, True),
    (-0.2, -0.4286, 0.15, False),
])
def test_envelope_direction(slope, predicted, tol, expected):
    assert envelope_check(synthetic(slope), predicted, tol).passed is expected


def test_reproducible(small_ensemble, profile):
    a = rate_experiment(small_ensemble[:3], profile, P, T_GRID)
    b = rate_experiment(small_ensemble[:3], profile, P, T_GRID, jobs=3)
    assert a == b


def test_gamma_policy():
    assert default_gamma(0.75, 1.0) == pytest.approx(0.1)
    assert default_gamma(0.75, 2.0) == pytest.approx(0.225)


def test_sweep_predictions():
    rows = alpha_sweep([0.25, 0.5, 1.0, 2.0], 0.75, kmax=4, count=1, mgrid=16,
                       T_grid=geometric_grid(10, 1e3, 7))
    np.testing.assert_allclose([r.predicted_rate for r in rows], [0.75, 0.6, 0.428571, 0.272727], atol=1e-6)
    assert all(np.diff([r.predicted_rate for r in rows]) < 0)
    assert all(r.envelope_ok for r in rows)
    assert alpha_sweep([], 0.75) == []
