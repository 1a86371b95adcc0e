import numpy as np
import pytest

from pnormlab.ensembles import SeededRng, gaussian_vector

_ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    """Record one pass/fail line per acceptance criterion; printed at session end."""
    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def random_density(rng, dim, rank=None):
    g = gaussian_vector(rng, dim, size=rank or dim).T
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return SeededRng(12345).generator()
