import numpy as np
import pytest

import gridstealth as gs


def scalar_model(h=1.0, sxx=1.0, sigma_sq=1.0):
    return gs.ObservationModel(np.array([[h]]), np.array([[sxx]]), sigma_sq)


def random_pd(rng, n, floor=0.1):
    a = rng.standard_normal((n, n))
    return a @ a.T + floor * np.eye(n)


def random_psd(rng, n, rank=None):
    a = rng.standard_normal((n, rank or n))
    return a @ a.T


@pytest.fixture(scope="session")
def case30():
    return gs.load_builtin("case30")


@pytest.fixture(scope="session")
def jac30(case30):
    return gs.build_jacobian(case30)


@pytest.fixture(scope="session")
def jac2():
    return gs.build_jacobian(gs.load_builtin("case2"))


@pytest.fixture(scope="session")
def jac3():
    return gs.build_jacobian(gs.load_builtin("case3"))


@pytest.fixture(scope="session")
def jac5_random():
    return gs.build_jacobian(gs.random_case(5, seed=11))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
