"""
Exception hierarchy for decov.

Every failure the CLI can report derives from DecovError; main.py maps the
subclasses to exit statuses.
"""
from typing import Optional


class DecovError(Exception):
    """Base class for all decov failures."""


class ConfigError(DecovError):
    """An environment variable or flag holds an unusable value."""

    def __init__(self, variable: str, message: str):
        super().__init__(f"{variable}: {message}")
        self.variable = variable


class ParseError(DecovError):
    """Mini source text does not match the grammar."""

    def __init__(self, message: str, line: int, column: int, file: str = "<string>"):
        super().__init__(f"{file}:{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.file = file


class TransformError(DecovError):
    """The branch transform met a tree it cannot rewrite."""


class CompileError(DecovError):
    """The AST cannot be encoded in the decov ISA."""


class RelocationError(CompileError):
    """Jump relocation did not reach a fixpoint within its iteration guard."""


class MalformedCodeError(CompileError):
    """Code bytes that do not decode into whole instructions."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"offset {offset}: {message}")
        self.message = message
        self.offset = offset


class InstrumentationError(DecovError):
    """Probe insertion failed for a code object."""

    def __init__(self, function: str, message: str):
        super().__init__(f"cannot instrument {function}: {message}")
        self.function = function


class VerificationError(DecovError):
    """A code object failed verify(); carries the violation list."""

    def __init__(self, name: str, violations: list):
        summary = "; ".join(str(v) for v in violations[:5])
        super().__init__(f"{name} failed verification: {summary}")
        self.violations = violations


class VMFault(DecovError):
    """The virtual machine hit an impossible state (stack underflow, bad opcode)."""

    def __init__(self, message: str, offset: Optional[int] = None):
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")
        self.offset = offset


class MiniRuntimeError(DecovError):
    """An exception raised inside a Mini program; catchable by try/except."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message
        self.traceback: list[tuple[str, str, Optional[int]]] = []


class CoverageEngineError(DecovError):
    """The dynamic phase detected a broken invariant."""


class LoadError(DecovError):
    """A module could not be loaded; carries the load chain that led to it."""

    def __init__(self, message: str, chain: Optional[list[str]] = None):
        self.chain = list(chain or [])
        suffix = f" (load chain: {' -> '.join(self.chain)})" if self.chain else ""
        super().__init__(f"{message}{suffix}")


class ReportSchemaError(DecovError):
    """A JSON coverage report does not follow the frozen schema."""
