import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from fixtures_eval import FIXTURE_SCHEMA, write_dataset  # noqa: E402
from etm import DatabaseInstance  # noqa: E402


@pytest.fixture(scope="session")
def fixture_schema():
    return FIXTURE_SCHEMA


@pytest.fixture(scope="session")
def dataset_paths(tmp_path_factory):
    root = tmp_path_factory.mktemp("fixture60")
    return write_dataset(str(root))


@pytest.fixture(scope="session")
def planted_db(dataset_paths):
    return DatabaseInstance.from_file(dataset_paths["db_file"])
