import sys

import numpy as np
import pytest

from bhpower.core import llr_spectrum, pair_from_arrays

WORKED_P = (0.5, 0.5)
WORKED_Q = (0.9, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def worked():
    return llr_spectrum(pair_from_arrays(WORKED_P, WORKED_Q))


@pytest.fixture(scope="session")
def bernoulli():
    """Bernoulli(0.5) under P against Bernoulli(0.9) under Q."""
    return llr_spectrum(pair_from_arrays([0.5, 0.5], [0.1, 0.9]))


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if not results:
        return
    from test_acceptance import verdict_line

    terminalreporter.section("acceptance criteria")
    for i in sorted(results):
        terminalreporter.write_line(verdict_line(i, *results[i]))
