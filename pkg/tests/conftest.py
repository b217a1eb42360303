import pytest

from slowcert import (
    friction_example,
    identification_example,
    pendulum_example,
    scalar_example,
)


@pytest.fixture(scope="session")
def scalar_bundle():
    return scalar_example()


@pytest.fixture(scope="session")
def pendulum_bundle():
    return pendulum_example()


@pytest.fixture(scope="session")
def friction_bundle():
    return friction_example()


@pytest.fixture(scope="session")
def identification_bundle():
    return identification_example()


@pytest.fixture(scope="session")
def all_bundles(scalar_bundle, pendulum_bundle, friction_bundle, identification_bundle):
    return (scalar_bundle, pendulum_bundle, friction_bundle, identification_bundle)
