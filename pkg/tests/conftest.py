import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from t2s.catalog import load_catalog_map

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="session")
def tables_path():
    return os.path.join(FIXTURES, "tables.json")


@pytest.fixture(scope="session")
def catalogs(tables_path):
    return load_catalog_map(tables_path)


@pytest.fixture(scope="session")
def schema_entries(tables_path):
    with open(tables_path) as fh:
        return {e["db_id"]: e for e in json.load(fh)}


@pytest.fixture(scope="session")
def dev_examples():
    with open(os.path.join(FIXTURES, "dev.json")) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def em_corpus():
    with open(os.path.join(FIXTURES, "em_corpus.json")) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def serialize_golden():
    with open(os.path.join(FIXTURES, "serialize_golden.json")) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def triage_suite():
    with open(os.path.join(FIXTURES, "triage_suite.json")) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def descriptions_path():
    return os.path.join(FIXTURES, "descriptions.json")


@pytest.fixture(scope="session")
def toy_dbs(tmp_path_factory):
    from dbbuild import build_toy_dbs

    root = tmp_path_factory.mktemp("toydbs")
    return build_toy_dbs(str(root))


@pytest.fixture(scope="session")
def anchor_db(tmp_path_factory):
    from dbbuild import build_anchor_db

    path = str(tmp_path_factory.mktemp("anchordb") / "world_1.sqlite")
    build_anchor_db(path)
    return path
