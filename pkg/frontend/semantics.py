"""
Value semantics of Mini, shared by the reference interpreter and the VM.

Operators follow Python's behaviour on ints, floats, strings, bools, None and
tuples; any host-level failure becomes a MiniRuntimeError.
"""
import operator

from models.errors import MiniRuntimeError

BINARY_OPERATORS = ("+", "-", "*", "/", "//", "%")
COMPARE_OPERATORS = ("<", "<=", "==", "!=", ">", ">=")

BINARY_FUNCS = (
    operator.add,
    operator.sub,
    operator.mul,
    operator.truediv,
    operator.floordiv,
    operator.mod,
)
COMPARE_FUNCS = (
    operator.lt,
    operator.le,
    operator.eq,
    operator.ne,
    operator.gt,
    operator.ge,
)

HOST_ERRORS = (TypeError, ArithmeticError, ValueError, MemoryError)


def binary_op(index: int, left, right):
    try:
        return BINARY_FUNCS[index](left, right)
    except HOST_ERRORS as exc:
        raise MiniRuntimeError(f"{BINARY_OPERATORS[index]}: {exc}") from None


def compare_op(index: int, left, right) -> bool:
    try:
        return bool(COMPARE_FUNCS[index](left, right))
    except HOST_ERRORS as exc:
        raise MiniRuntimeError(f"{COMPARE_OPERATORS[index]}: {exc}") from None


def negate(value):
    try:
        return -value
    except HOST_ERRORS as exc:
        raise MiniRuntimeError(f"unary -: {exc}") from None


def truthy(value) -> bool:
    return bool(value)


def literal_matches(subject, literal) -> bool:
    """`case` semantics: True/False/None match by identity, other literals by value."""
    if literal is None or isinstance(literal, bool):
        return subject is literal
    if isinstance(subject, bool):
        return False
    return type(subject) in (int, float, str) and subject == literal


def range_count(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise MiniRuntimeError(f"range() needs an int, got {format_value(value)}")
    return value


def format_value(value) -> str:
    return str(value)
