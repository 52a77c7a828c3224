import pytest

from kbp import scenario as sc


@pytest.fixture(scope="session")
def pg1():
    return sc.load_bundled("pg1")


@pytest.fixture(scope="session")
def pg2_gamma():
    return sc.load_bundled("pg2_gamma")


@pytest.fixture(scope="session")
def pg2_gamma_prime():
    return sc.load_bundled("pg2_gamma_prime")


@pytest.fixture(scope="session")
def pg3():
    return sc.load_bundled("pg3")


@pytest.fixture(scope="session")
def two_agent():
    return sc.load_bundled("pg2_two_agent")


@pytest.fixture(scope="session")
def diffuse():
    return sc.load_bundled("diffuse_line3")


@pytest.fixture(scope="session")
def muddy():
    return sc.load_bundled("muddy_children_n3")
