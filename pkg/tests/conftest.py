import numpy as np
import pytest


def sc_cauchy(z, var=1.0):
    """Semicircle Cauchy transform with the branch that decays at infinity."""
    z = np.asarray(z, complex)
    r = np.sqrt(z - 2 * np.sqrt(var)) * np.sqrt(z + 2 * np.sqrt(var))
    return (z - r) / (2 * var)


def mp_cauchy(z, lam=1.0, a=1.0):
    """Marchenko-Pastur (rate lam, jump a) Cauchy transform."""
    z = np.asarray(z, complex)
    lo, hi = a * (1 - np.sqrt(lam)) ** 2, a * (1 + np.sqrt(lam)) ** 2
    r = np.sqrt(z - lo) * np.sqrt(z - hi)
    return (z + a * (1 - lam) - r) / (2 * a * z)


@pytest.fixture
def cone_points():
    x = np.linspace(-3, 3, 7)
    y = np.array([0.5, 1.0, 3.0])
    return (x[:, None] + 1j * y[None, :]).ravel()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
