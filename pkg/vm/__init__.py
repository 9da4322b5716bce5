from .machine import (
    EXIT_EXCEPTION,
    EXIT_FAULT,
    EXIT_OK,
    LOAD_BUILTIN,
    ExecutionResult,
    Frame,
    NullProbeSink,
    ProbeSink,
    VirtualMachine,
)
from .registry import FunctionRegistry, FunctionValue, RegistryEntry
from .tracing import CollectingTracer, NullTracer, make_tracer

__all__ = [
    "EXIT_EXCEPTION",
    "EXIT_FAULT",
    "EXIT_OK",
    "LOAD_BUILTIN",
    "ExecutionResult",
    "Frame",
    "NullProbeSink",
    "ProbeSink",
    "VirtualMachine",
    "FunctionRegistry",
    "FunctionValue",
    "RegistryEntry",
    "CollectingTracer",
    "NullTracer",
    "make_tracer",
]
