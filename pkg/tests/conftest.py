import os

import pytest

from models import DecovConfig
from vm import FunctionRegistry

from tests.helpers import write_program

_DECOV_VARIABLES = (
    "DECOV_THRESHOLD",
    "DECOV_NO_ELIM",
    "DECOV_NO_DEINSTR",
    "DECOV_DEBUG",
    "DECOV_LOG_LEVEL",
    "DECOV_BENCH_RUNS",
    "DECOV_MAX_FRAMES",
)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for variable in _DECOV_VARIABLES:
        monkeypatch.delenv(variable, raising=False)


@pytest.fixture
def config():
    return DecovConfig(debug=True)


@pytest.fixture
def registry():
    return FunctionRegistry()


@pytest.fixture
def program(tmp_path):
    """Write Mini source into the test's temporary directory and return its path."""

    def _write(text: str, name: str = "prog.mini"):
        return write_program(tmp_path, name, text)

    return _write


def pytest_collection_modifyitems(config, items):
    if os.getenv("DECOV_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="slow; set DECOV_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
