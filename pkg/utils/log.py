"""
Component-tagged logging on stderr through rich.
"""
import logging

from rich.console import Console
from rich.logging import RichHandler

_ROOT = "decov"
_configured = False


def configure_logging(level: str = "WARNING") -> None:
    """Install the shared handler once; later calls only adjust the level."""
    global _configured
    root = logging.getLogger(_ROOT)
    if not _configured:
        handler = RichHandler(
            console=Console(stderr=True),
            show_time=False,
            show_path=False,
            markup=False,
        )
        handler.setFormatter(logging.Formatter("[%(component)s] %(message)s"))
        handler.addFilter(_ComponentFilter())
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    root.setLevel(level.upper())


class _ComponentFilter(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        record.component = record.name.rsplit(".", 1)[-1]
        return True


def get_logger(component: str) -> logging.Logger:
    """Logger named decov.<component>; messages render as `[component] message`."""
    if not _configured:
        configure_logging()
    return logging.getLogger(f"{_ROOT}.{component}")
