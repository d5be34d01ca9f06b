import numpy as np
import pytest

from dualdrive.data import Dataset
from dualdrive.models import Network, build_model


def pytest_addoption(parser):
    """Allow the option to run the long training and driving tests."""
    parser.addoption(
        "--slow",
        action="store_true",
        help="Run tests that train networks or drive full sessions.",
    )


@pytest.fixture(name="slow", scope="session")
def fixture_slow(pytestconfig):
    if not pytestconfig.getoption("--slow"):
        pytest.skip(reason="Needs --slow")


@pytest.fixture(name="original", scope="session")
def fixture_original() -> Network:
    return Network.initialize(build_model("original"), seed=7)


@pytest.fixture(name="modified", scope="session")
def fixture_modified() -> Network:
    return Network.initialize(build_model("modified"), seed=7)


def _random_dataset(count: int, seed: int = 0, angles=None) -> Dataset:
    rng = np.random.default_rng(seed)
    frames = rng.integers(0, 256, size=(count, 120, 160, 1), dtype=np.uint8)
    if angles is None:
        angles = rng.uniform(-1.0, 1.0, size=count)
    return Dataset(frames, np.asarray(angles, dtype=np.float32))


@pytest.fixture(name="make_dataset")
def fixture_make_dataset():
    """Random noise frames with the given (or uniformly drawn) angles."""
    return _random_dataset
