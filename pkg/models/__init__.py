from .data_models import (
    CoverageMode,
    TraceMode,
    Deinstrumentation,
    RunMode,
    TraceConfig,
    LoadPolicy,
    DecovConfig,
    FileCoverage,
    CoverageSummary,
    CoverageReport,
    BenchResult,
    EngineStats,
    percent,
)
from .errors import (
    DecovError,
    ConfigError,
    ParseError,
    TransformError,
    CompileError,
    RelocationError,
    MalformedCodeError,
    InstrumentationError,
    VerificationError,
    VMFault,
    MiniRuntimeError,
    CoverageEngineError,
    LoadError,
    ReportSchemaError,
)

__all__ = [
    "CoverageMode",
    "TraceMode",
    "Deinstrumentation",
    "RunMode",
    "TraceConfig",
    "LoadPolicy",
    "DecovConfig",
    "FileCoverage",
    "CoverageSummary",
    "CoverageReport",
    "BenchResult",
    "EngineStats",
    "percent",
    "DecovError",
    "ConfigError",
    "ParseError",
    "TransformError",
    "CompileError",
    "RelocationError",
    "MalformedCodeError",
    "InstrumentationError",
    "VerificationError",
    "VMFault",
    "MiniRuntimeError",
    "CoverageEngineError",
    "LoadError",
    "ReportSchemaError",
]
