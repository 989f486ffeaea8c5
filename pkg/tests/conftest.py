import pytest

from quadcentral.central import LValueCache, default_kernel
from quadcentral.smoothing import plateau_weight


@pytest.fixture(scope="session")
def weight():
    return plateau_weight(32.0)


@pytest.fixture(scope="session")
def kernel1():
    return default_kernel(1)


@pytest.fixture(scope="session")
def kernel2():
    return default_kernel(2)


@pytest.fixture(scope="session")
def kernel3():
    return default_kernel(3)


@pytest.fixture(scope="session")
def l_cache():
    """Shared central-value cache so overlapping sweeps price each d once."""
    return LValueCache()
