import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from macroscopicity.core import DensityOperator, StateVector

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def random_pure(n, rng):
    v = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
    return StateVector(v / np.linalg.norm(v), n)


def random_mixed(n, rank, rng):
    x = rng.standard_normal((2 ** n, rank)) + 1j * rng.standard_normal((2 ** n, rank))
    m = x @ x.conj().T
    return DensityOperator.from_matrix(m / np.trace(m).real)


def random_hermitian(d, rng):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
