import numpy as np
import pytest

from massframe import Constant, Exponential, GaussianState, PowerLaw, SystemParams


@pytest.fixture
def td_params():
    """Time-dependent masses used throughout: m1 = e^{0.2t}, m2 = (1 + 0.3t)^2."""
    return SystemParams(Exponential(1, 0.2), PowerLaw(1, 0.3, 2), Constant(1), Constant(1), Constant(0.3), (0, 5))


@pytest.fixture
def const_params():
    return SystemParams(Constant(2.0), Constant(0.5), Constant(1.0), Constant(1.3), Constant(0.3), (0, 10))


@pytest.fixture
def unit_params():
    return SystemParams(Constant(1), Constant(1), Constant(1), Constant(1), Constant(0), (0, 10))


@pytest.fixture
def displaced():
    return GaussianState.displaced([1.0, 0.5, 0.0, 0.0])


def random_symplectic(rng, n=2):
    """Product of random scalings, shears and rotations: symplectic by construction."""
    d = 2 * n
    M = np.eye(d)
    for _ in range(3):
        u = rng.uniform(-0.5, 0.5, n)
        D = np.diag(np.concatenate([np.exp(u), np.exp(-u)]))
        B = rng.uniform(-1, 1, (n, n))
        B = B + B.T
        Sh = np.eye(d)
        Sh[n:, :n] = B
        th = rng.uniform(0, 2 * np.pi)
        R = np.eye(d)
        R[0, 0] = R[n, n] = np.cos(th)
        R[0, n], R[n, 0] = np.sin(th), -np.sin(th)
        M = R @ Sh @ D @ M
    return M


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
