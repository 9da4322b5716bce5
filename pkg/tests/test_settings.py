import logging
import os

import pytest
from rich.logging import RichHandler

from models import ConfigError, Deinstrumentation

from utils import configure_logging, get_logger, load_settings


@pytest.fixture
def env_file(tmp_path):
    return tmp_path / "absent.env"


def test_defaults(env_file):
    config = load_settings(env_file)
    assert config.threshold == 64
    assert config.deinstrumentation == Deinstrumentation.FULL
    assert config.log_level == "WARNING"
    assert config.bench_runs == 5


def test_environment_variables(env_file, monkeypatch):
    monkeypatch.setenv("DECOV_THRESHOLD", "8")
    monkeypatch.setenv("DECOV_DEBUG", "yes")
    monkeypatch.setenv("DECOV_LOG_LEVEL", "debug")
    config = load_settings(env_file)
    assert config.threshold == 8
    assert config.debug is True
    assert config.log_level == "DEBUG"


def test_overrides_win_and_none_is_ignored(env_file, monkeypatch):
    monkeypatch.setenv("DECOV_THRESHOLD", "8")
    assert load_settings(env_file, threshold=3).threshold == 3
    assert load_settings(env_file, threshold=None).threshold == 8


@pytest.mark.parametrize("variable, deinstrumentation", [
    ("DECOV_NO_ELIM", Deinstrumentation.FLAG_ONLY),
    ("DECOV_NO_DEINSTR", Deinstrumentation.NONE),
])
def test_ablation_switches(env_file, monkeypatch, variable, deinstrumentation):
    monkeypatch.setenv(variable, "1")
    assert load_settings(env_file).deinstrumentation == deinstrumentation


def test_env_file_is_read(tmp_path):
    env = tmp_path / ".env"
    env.write_text("DECOV_MAX_FRAMES=50\n")
    try:
        assert load_settings(env).max_frames == 50
    finally:
        os.environ.pop("DECOV_MAX_FRAMES", None)


@pytest.mark.parametrize("variable, value", [
    ("DECOV_THRESHOLD", "0"),
    ("DECOV_THRESHOLD", "many"),
    ("DECOV_DEBUG", "maybe"),
    ("DECOV_BENCH_RUNS", "3"),
    ("DECOV_LOG_LEVEL", "chatty"),
])
def test_bad_values_name_their_variable(env_file, monkeypatch, variable, value):
    monkeypatch.setenv(variable, value)
    with pytest.raises(ConfigError) as info:
        load_settings(env_file)
    assert info.value.variable == variable


def test_component_loggers():
    configure_logging("INFO")
    logger = get_logger("Engine")
    assert logger.name == "decov.Engine"
    assert logging.getLogger("decov").level == logging.INFO
    configure_logging("WARNING")
    configure_logging("DEBUG")
    handlers = logging.getLogger("decov").handlers
    assert sum(isinstance(h, RichHandler) for h in handlers) == 1
    assert len(handlers) == 1
    configure_logging("WARNING")
