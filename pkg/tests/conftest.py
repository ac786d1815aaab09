import pytest

from bwbounds import DEFAULT_CONTEXT, named_fixture, parse_exponents


@pytest.fixture(scope="session")
def ctx():
    return DEFAULT_CONTEXT


@pytest.fixture(scope="session")
def golden():
    return named_fixture("golden")


@pytest.fixture(scope="session")
def root_pair():
    return parse_exponents("sqrt2m1,sqrt3m1")
