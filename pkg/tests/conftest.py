import numpy as np
import pytest

from riskscope.dataset import generate_synthetic, standardize


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def synthetic_991():
    return generate_synthetic(991, 7)


@pytest.fixture(scope="session")
def standardized_991(synthetic_991):
    return standardize(synthetic_991)[0]


def well_conditioned(rng, n, d):
    """Random design with singular values bounded away from zero."""
    q, _ = np.linalg.qr(rng.normal(size=(n, d)))
    s = rng.uniform(1.0, 3.0, size=d)
    v, _ = np.linalg.qr(rng.normal(size=(d, d)))
    return (q * s) @ v.T * np.sqrt(n)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS.lines():
            terminalreporter.write_line(line)
