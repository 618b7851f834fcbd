import math

import pytest
from hypothesis import HealthCheck, settings

from sparse_preden.problem import build_problem

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ETA_HIGH = math.exp(-20)


@pytest.fixture(scope="session")
def moderate():
    """r = 0.25 with moderate sparsity."""
    return build_problem(0.25, 0.05)


@pytest.fixture(scope="session")
def sparse():
    """r = 0.25 with very high sparsity."""
    return build_problem(0.25, ETA_HIGH)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
