import pytest

from wienerlab import EpsilonGrid, catalog_build, linear_functional


@pytest.fixture(scope="session")
def f31():
    return catalog_build("thm31", a=2.0)


@pytest.fixture(scope="session")
def f33():
    return catalog_build("thm33", eta=1e-4, mu=2e-4)


@pytest.fixture(scope="session")
def flin():
    return linear_functional()


@pytest.fixture(scope="session")
def grid():
    return EpsilonGrid.default()
