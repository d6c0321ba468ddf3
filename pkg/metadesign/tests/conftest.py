import os

import pytest

from metadesign.tests import factories

TEST_INI = os.path.join(os.path.dirname(__file__), "..", "..", "test.ini")


@pytest.fixture
def test_ini():
    """Path of the ini file the config tests read."""
    return os.path.abspath(TEST_INI)


@pytest.fixture
def toy_config(tmp_path):
    """A Config with a toy training setup writing into tmp_path."""
    return factories.create_config(tmp_path)


@pytest.fixture
def context(toy_config):
    """Action context as the command line builds it."""
    return {"config": toy_config, "workers": 1}


@pytest.fixture
def onemax10():
    return factories.create_instance(family="onemax", d=10)
