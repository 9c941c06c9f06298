import numpy as np
import pytest

from simboot._backend import BACKEND

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pytest_report_header(config):
    return f"simboot kernel backend: {BACKEND}"


@pytest.fixture
def nprng():
    return np.random.default_rng(20240611)


def backends():
    names = ["python"]
    if BACKEND == "cython":
        names.append("cython")
    return names
