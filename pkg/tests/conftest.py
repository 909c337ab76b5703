import numpy as np
import pytest

from nvpol import Uniform, load_table1, set_polarization

# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture
def table1():
    return load_table1()


@pytest.fixture
def polarized5():
    """First five reference spins, fully polarized, 25 G."""
    return set_polarization(load_table1(5).with_field(25.0), Uniform(1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: (int(k.split(".")[0]), k)):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
