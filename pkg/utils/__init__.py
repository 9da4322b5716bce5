from .log import configure_logging, get_logger
from .settings import load_settings

__all__ = ["configure_logging", "get_logger", "load_settings"]
