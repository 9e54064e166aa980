import warnings

import numpy as np
import pytest

from genschro.errors import BoundaryWarning

ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(label: str, passed: bool, detail: str):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(autouse=True)
def _quiet_boundary_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: _criterion_key(s)):
            terminalreporter.write_line(line)


def _criterion_key(line: str):
    label = line.split("criterion ", 1)[1].split(":", 1)[0]
    digits = "".join(ch for ch in label if ch.isdigit())
    return (int(digits or 0), label)
