"""
Settings loader: .env file, then DECOV_* environment variables, then explicit overrides.
"""
import os
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from models.data_models import DecovConfig
from models.errors import ConfigError

_ENV_VARS = {
    "threshold": "DECOV_THRESHOLD",
    "no_elim": "DECOV_NO_ELIM",
    "no_deinstr": "DECOV_NO_DEINSTR",
    "debug": "DECOV_DEBUG",
    "log_level": "DECOV_LOG_LEVEL",
    "bench_runs": "DECOV_BENCH_RUNS",
    "max_frames": "DECOV_MAX_FRAMES",
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"", "0", "false", "no", "off"}


def _parse_flag(variable: str, raw: str) -> bool:
    value = raw.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ConfigError(variable, f"expected a boolean, got {raw!r}")


def load_settings(env_file: Optional[str | Path] = None, **overrides: Any) -> DecovConfig:
    """Build a DecovConfig; overrides whose value is None are ignored."""
    load_dotenv(env_file or Path(__file__).parent.parent / ".env")

    values: dict[str, Any] = {}
    for field_name, variable in _ENV_VARS.items():
        raw = os.getenv(variable)
        if raw is None:
            continue
        if DecovConfig.model_fields[field_name].annotation is bool:
            values[field_name] = _parse_flag(variable, raw)
        else:
            values[field_name] = raw.strip()

    values.update({k: v for k, v in overrides.items() if v is not None})

    try:
        return DecovConfig(**values)
    except ValidationError as exc:
        error = exc.errors()[0]
        field_name = str(error["loc"][0]) if error["loc"] else "config"
        raise ConfigError(_ENV_VARS.get(field_name, field_name), error["msg"]) from exc
