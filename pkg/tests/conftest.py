import numpy as np
import pytest

from pathlib import Path

from corrsched.model import JointActivationMatrix, ScheduleMatrix, load_matrix

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


def random_activation_matrix(rng: np.random.Generator, n: int) -> JointActivationMatrix:
    """i.i.d. uniform entries, symmetrized, zero diagonal."""
    x = rng.random((n, n))
    x = (x + x.T) / 2.0
    np.fill_diagonal(x, 0.0)
    return JointActivationMatrix(x)


def random_soft_schedule(rng: np.random.Generator, n: int, l: int) -> ScheduleMatrix:
    """Rows drawn from a flat Dirichlet, i.e. uniform on the simplex."""
    e = rng.dirichlet(np.ones(l), size=n)
    return ScheduleMatrix(e)


@pytest.fixture(scope="session")
def fixture_n8() -> JointActivationMatrix:
    return load_matrix(DATA / "fixture_n8.json")


@pytest.fixture(scope="session")
def fixture_n10() -> JointActivationMatrix:
    return load_matrix(DATA / "fixture_n10.json")


@pytest.fixture(scope="session")
def fixture_n12() -> JointActivationMatrix:
    return load_matrix(DATA / "fixture_n12.json")


@pytest.fixture(scope="session")
def fixture_n14() -> JointActivationMatrix:
    return load_matrix(DATA / "fixture_n14.json")
