import numpy as np
import pytest

from lplab.sequences import LacunarySequence

ACCEPTANCE_LINES = []


def report(criterion: int, ok: bool, detail: str):
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((criterion, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def dyadic():
    return LacunarySequence(tuple(2**k for k in range(13)), "dyadic")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
