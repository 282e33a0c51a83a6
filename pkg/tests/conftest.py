import pytest

from ologkit import bundled_schema, protein_instance, social_instance


@pytest.fixture(scope="session")
def schema():
    return bundled_schema()


@pytest.fixture(scope="session")
def protein():
    return protein_instance()


@pytest.fixture(scope="session")
def social():
    return social_instance()
