import pytest

from roughmax.sphere_kernel import make_sphere_grid


@pytest.fixture(scope="session")
def circle():
    return make_sphere_grid(2, 4096)


@pytest.fixture(scope="session")
def circle_small():
    return make_sphere_grid(2, 512)


@pytest.fixture(scope="session")
def points0():
    return make_sphere_grid(1)
