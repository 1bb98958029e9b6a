import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from degenflow._quad import geometric_edges, integrate, loglog_fit, panel_rule, richardson


@pytest.mark.parametrize("order", [1, 4, 8, 16])
def test_gauss_exact_degree(order):
    for deg in range(2 * order):
        assert integrate(lambda x: x**deg, 0.0, 1.0, order) == pytest.approx(1 / (deg + 1), rel=1e-13)


def test_batched_panels_and_zero_width():
    edges = np.array([[0.0, 0.5, 1.0], [0.0, 0.0, 2.0]])
    x, w = panel_rule(edges, 6)
    assert x.shape == (2, 12)
    np.testing.assert_allclose(np.sum(w * x**2, axis=1), [1 / 3, 8 / 3], rtol=1e-14)


def test_geometric_edges():
    np.testing.assert_allclose(geometric_edges(2.0, 3), [0, 0.25, 0.5, 1.0, 2.0])


def test_graded_rule_handles_root_singularity():
    x, w = panel_rule(geometric_edges(1.0, 60), 8)
    assert np.sum(w * x**-0.5) == pytest.approx(2.0, rel=1e-8)


@given(st.floats(-3, 3), st.floats(0.1, 5))
def test_richardson_polynomial_error(a, b):
    # D(h) = L + a h + b h^2 is extrapolated exactly
    h = 0.1 * 2.0 ** -np.arange(5)
    best, err, _ = richardson(1.0 + a * h + b * h**2)
    assert best == pytest.approx(1.0, abs=1e-10)


def test_richardson_derivative():
    h = 0.2 * 2.0 ** -np.arange(7)
    best, err, _ = richardson((np.exp(1 + h) - np.exp(1)) / h)
    assert best == pytest.approx(np.e, rel=1e-11)
    assert err < 1e-8


def test_loglog_fit():
    x = np.geomspace(1, 100, 7)
    slope, icpt, rms = loglog_fit(x, 3 * x**-0.4)
    assert slope == pytest.approx(-0.4) and np.exp(icpt) == pytest.approx(3) and rms < 1e-12
