import pytest

from cislunar_ris.config import load_default_scenario


@pytest.fixture(scope="session")
def default_scenario():
    return load_default_scenario()
