"""
Data models for the decov coverage system.
"""
from pathlib import Path
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class CoverageMode(str, Enum):
    LINE = "line"
    BRANCH = "line+branch"


class TraceMode(str, Enum):
    OFF = "off"
    NULL = "null"
    COLLECT = "collect"


class Deinstrumentation(str, Enum):
    FULL = "full"
    FLAG_ONLY = "flag-only"
    NONE = "none"


class RunMode(str, Enum):
    NONE = "none"
    TRACE_NULL = "trace-null"
    TRACE_COV = "trace-cov"
    PROBE_FULL = "probe-full"
    PROBE_FLAG_ONLY = "probe-flag-only"
    PROBE_NO_DEINSTR = "probe-no-deinstr"

    @property
    def uses_probes(self) -> bool:
        return self.value.startswith("probe")

    @property
    def trace_mode(self) -> TraceMode:
        if self == RunMode.TRACE_NULL:
            return TraceMode.NULL
        if self == RunMode.TRACE_COV:
            return TraceMode.COLLECT
        return TraceMode.OFF

    @property
    def deinstrumentation(self) -> Deinstrumentation:
        if self == RunMode.PROBE_FLAG_ONLY:
            return Deinstrumentation.FLAG_ONLY
        if self == RunMode.PROBE_NO_DEINSTR:
            return Deinstrumentation.NONE
        return Deinstrumentation.FULL


class TraceConfig(BaseModel):
    """Per-line tracing callback configuration"""
    mode: TraceMode = TraceMode.OFF
    path_prefix: str = Field(default="", description="Only frames whose source starts with this fire")

    def matches(self, source: str) -> bool:
        return source.startswith(self.path_prefix)


class LoadPolicy(BaseModel):
    """Which modules get instrumented, and how"""
    include_prefixes: list[str] = Field(default_factory=list)
    mode: CoverageMode = CoverageMode.LINE

    def includes(self, path: str | Path) -> bool:
        resolved = str(Path(path).resolve())
        return any(resolved.startswith(str(Path(p).resolve())) for p in self.include_prefixes)

    @property
    def branch(self) -> bool:
        return self.mode == CoverageMode.BRANCH


class DecovConfig(BaseModel):
    """Tunables of a run, assembled from the environment and CLI flags"""
    threshold: int = Field(default=64, ge=1, description="Counter value that triggers a batch")
    no_elim: bool = Field(default=False, description="Keep the record flag, skip bytecode elimination")
    no_deinstr: bool = Field(default=False, description="Record on every fire, never eliminate")
    debug: bool = Field(default=False, description="Check skip exactness in the VM")
    log_level: str = Field(default="WARNING")
    bench_runs: int = Field(default=5, ge=5)
    max_frames: int = Field(default=1000, ge=1)

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.strip().upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"unknown log level {value!r}")
        return level

    @property
    def deinstrumentation(self) -> Deinstrumentation:
        if self.no_deinstr:
            return Deinstrumentation.NONE
        if self.no_elim:
            return Deinstrumentation.FLAG_ONLY
        return Deinstrumentation.FULL


def percent(executed: int, total: int) -> float:
    """100 * executed / total, with an empty universe counting as fully covered"""
    if total == 0:
        return 100.0
    return 100.0 * executed / total


class FileCoverage(BaseModel):
    """Executed and missing facts of one source file"""
    model_config = ConfigDict(extra="forbid")

    executed_lines: list[int] = Field(default_factory=list)
    missing_lines: list[int] = Field(default_factory=list)
    executed_branches: list[tuple[int, int]] = Field(default_factory=list)
    missing_branches: list[tuple[int, int]] = Field(default_factory=list)

    @property
    def line_percent(self) -> float:
        return percent(len(self.executed_lines), len(self.executed_lines) + len(self.missing_lines))

    @property
    def branch_percent(self) -> float:
        total = len(self.executed_branches) + len(self.missing_branches)
        return percent(len(self.executed_branches), total)


class CoverageSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    line_percent: float
    branch_percent: float


class CoverageReport(BaseModel):
    """Coverage of a run; field names are frozen"""
    model_config = ConfigDict(extra="forbid")

    files: dict[str, FileCoverage] = Field(default_factory=dict)
    summary: CoverageSummary

    def executed_facts(self) -> set[tuple]:
        facts: set[tuple] = set()
        for path, cov in self.files.items():
            facts.update((path, line) for line in cov.executed_lines)
            facts.update((path, o, d) for o, d in cov.executed_branches)
        return facts

    def missing_facts(self) -> set[tuple]:
        facts: set[tuple] = set()
        for path, cov in self.files.items():
            facts.update((path, line) for line in cov.missing_lines)
            facts.update((path, o, d) for o, d in cov.missing_branches)
        return facts

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


class BenchResult(BaseModel):
    """Median wall time of one program under one mode"""
    program: str
    mode: RunMode
    runs: int = Field(ge=5)
    median_seconds: float = Field(ge=0.0)
    overhead_ratio: float = Field(default=1.0, description="Relative to mode=none")

    @property
    def overhead_percent(self) -> float:
        return (self.overhead_ratio - 1.0) * 100.0


class EngineStats(BaseModel):
    """Counters of the dynamic phase, gathered after a run"""
    probes_inserted: int = 0
    fires: int = 0
    first_fires: int = 0
    batches: int = 0
    rewritten_code_objects: int = 0
    eliminated: int = 0
    stale_fires: int = 0
    skip_violations: int = 0

    def rows(self) -> list[tuple[str, int]]:
        return [(name.replace("_", " "), value) for name, value in self.model_dump().items()]
