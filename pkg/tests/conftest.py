import math

import pytest

from fragcorr import derive_params

_ACCEPTANCE = []


@pytest.fixture
def stiff():
    # omega = 2, critical omega = 1
    return derive_params(m=1.0, hbar=1.0, kappa=1.0, a=1.0)


@pytest.fixture
def critical():
    return derive_params(m=1.0, hbar=1.0, kappa=0.25, a=1.0)


@pytest.fixture
def soft():
    return derive_params(m=1.0, hbar=1.0, kappa=0.1, a=1.0)


@pytest.fixture
def free():
    return derive_params(m=1.0, hbar=1.0, kappa=0.0, a=1.0)


@pytest.fixture
def acceptance():
    """Record one line per acceptance criterion for the terminal summary."""

    def record(name, ok, detail=""):
        _ACCEPTANCE.append((name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} {name} {detail}")
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")


def relerr(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a)


PI = math.pi
