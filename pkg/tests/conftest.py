import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from degenflow import EnsembleSpec, FlowProfile, SpectralParams, make_mgrid, make_random
from degenflow.experiments import prepare_ensemble

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DEFAULT = SpectralParams(0.75, 0.0, 1.0)
ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    """Record one acceptance line; printed again in the terminal summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def params():
    return DEFAULT


@pytest.fixture(scope="session")
def profile():
    return FlowProfile(1.0)


@pytest.fixture(scope="session")
def grid():
    return make_mgrid(16, grading=2.0, order=4)


@pytest.fixture(scope="session")
def small_ensemble():
    """Eight unnormalised random-decay members, kmax 8."""
    return make_random(EnsembleSpec(DEFAULT, kmax=8, count=8, seed=11, mgrid=64))


@pytest.fixture(scope="session")
def default_ensemble():
    """The default configuration: 16 normalised members, kmax 32, 128 nodes, seed 7."""
    return prepare_ensemble(EnsembleSpec(DEFAULT, kmax=32, count=16, seed=7, mgrid=128))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
