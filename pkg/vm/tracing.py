"""
Per-line tracing callbacks, the interpreter-hook baseline for coverage.

The VM calls a tracer with (source, previous line, line) whenever a frame
reaches a new line or arrives at a line through a backward jump. Previous
line is None for the first event of a frame.
"""
from typing import Optional

from models.data_models import TraceConfig, TraceMode


class NullTracer:
    """Does the path-prefix check every tracer has to do, then returns."""

    def __init__(self, config: TraceConfig):
        self.config = config

    def __call__(self, source: str, previous: Optional[int], line: int) -> None:
        if not self.config.matches(source):
            return


class CollectingTracer:
    """Records executed (file, line) pairs and per-frame line-to-line arcs."""

    def __init__(self, config: TraceConfig):
        self.config = config
        self.lines: set[tuple[str, int]] = set()
        self.arcs: set[tuple[str, int, int]] = set()

    def __call__(self, source: str, previous: Optional[int], line: int) -> None:
        if not self.config.matches(source):
            return
        self.lines.add((source, line))
        if previous is not None:
            self.arcs.add((source, previous, line))


def make_tracer(config: Optional[TraceConfig]):
    if config is None or config.mode == TraceMode.OFF:
        return None
    if config.mode == TraceMode.NULL:
        return NullTracer(config)
    return CollectingTracer(config)
