import numpy as np
import pytest

from monge_fem.mesh import build_uniform_square_mesh

NONCONVERGENCE = (
    "time marching has no attracting fixed point for these data: the residual is blind to "
    "continuous piecewise-linear perturbations and its linearization has eigenvalues of the wrong sign"
)

_ACCEPTANCE_LINES = []


def record_acceptance(criterion: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  criterion {criterion}  {detail}")


@pytest.fixture
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mesh8():
    return build_uniform_square_mesh(8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
