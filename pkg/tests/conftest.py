import numpy as np
import pytest

from udnscale.channel import build_pathloss
from udnscale.geometry import NetworkDomain


@pytest.fixture
def domain():
    return NetworkDomain(2, 40_000.0)


def two_slope(beta0, domain, R1=10.0, beta1=4.0):
    return build_pathloss(1.0, [beta0, beta1], [R1], domain)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict(capsys):
    """Print and record one pass/fail line for an acceptance criterion."""

    def emit(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
