import pytest

from dualmink.sphere import build_grid


@pytest.fixture(scope="session")
def g3():
    return build_grid(3, 32)


@pytest.fixture(scope="session")
def g3_fine():
    return build_grid(3, 64)


@pytest.fixture(scope="session")
def g2():
    return build_grid(2, 256)
