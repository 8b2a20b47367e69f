import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_density(rng, n, rank=None):
    rank = n if rank is None else rank
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# acceptance criteria report one line each; they are echoed after the run
ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def report():
    """Record the PASS/FAIL line for one acceptance criterion."""
    def record(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {n:>2}: {detail}"
        ACCEPTANCE_LINES[str(n)] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
