import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from szego_lab.indexing import PrimeTable

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def table():
    return PrimeTable.default()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for result in sorted(RESULTS, key=lambda r: r.number):
            terminalreporter.write_line(result.line())
