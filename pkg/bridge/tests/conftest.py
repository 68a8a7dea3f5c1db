import json
import os

import pytest

FIXTURES = os.path.abspath(
    os.path.join(os.path.dirname(__file__), "..", "..", "tests", "fixtures")
)


@pytest.fixture(scope="session")
def tables_path():
    return os.path.join(FIXTURES, "tables.json")


@pytest.fixture(scope="session")
def descriptions_path():
    return os.path.join(FIXTURES, "descriptions.json")


@pytest.fixture(scope="session")
def dev_examples():
    with open(os.path.join(FIXTURES, "dev.json")) as fh:
        return json.load(fh)
