import numpy as np
import pytest

from src.moments.basis import build_tensors
from src.solver.operators import build_operators
from src.utils.config import FrictionParams, PhysicsParams


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run long acceptance runs"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance run, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tensors2():
    return build_tensors(2)


@pytest.fixture
def ops3():
    return build_operators(3)


@pytest.fixture
def swme():
    return PhysicsParams(g=9.81, model="swme")


@pytest.fixture
def swlme():
    return PhysicsParams(g=9.81, model="swlme")


@pytest.fixture
def unit_gravity():
    return PhysicsParams(g=1.0)


@pytest.fixture
def slip_friction():
    return PhysicsParams(g=9.81, friction=FrictionParams(kind="slip", nu=0.1))
