"""
The decov instruction set.

Word-code: every unit is two bytes, opcode then operand. Operands wider than
a byte are carried by up to three EXTENDED_ARG prefixes, most significant
byte first. Jump operands count code units, measured from the end of the
jump instruction (prefixes included).
"""
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator

from models.errors import CompileError, MalformedCodeError

UNIT = 2
MAX_EXTENDED_ARGS = 3
MAX_ARG = (1 << (8 * (MAX_EXTENDED_ARGS + 1))) - 1


class Op(IntEnum):
    NOP = 0               # operand: bytes to skip when the NOP heads a probe
    EXTENDED_ARG = 1
    LOAD_CONST = 2        # push consts[arg]
    LOAD_NAME = 3         # push names[arg], locals first, then globals
    STORE_NAME = 4
    POP_TOP = 5
    UNARY_NEG = 6
    UNARY_NOT = 7
    BINARY_OP = 8         # arg indexes + - * / // %
    COMPARE_OP = 9        # arg indexes < <= == != > >=
    BUILD_TUPLE = 10
    JUMP_FORWARD = 11
    JUMP_BACKWARD = 12
    POP_JUMP_IF_FALSE = 13
    CALL = 14             # arg = number of arguments
    MAKE_FUNCTION = 15    # arg = const index of the function's code object
    RETURN_VALUE = 16
    RETURN_CONST = 17
    RAISE = 18
    PROBE = 19            # arg = const index of a ProbeHandle
    PRINT = 20            # pop, write, push None
    GET_RANGE_ITER = 21
    FOR_RANGE_NEXT = 22   # push next value, or pop the iterator and jump forward
    MATCH_LITERAL = 23    # keep the subject, push subject-matches-consts[arg]


FORWARD_JUMPS = frozenset({Op.JUMP_FORWARD, Op.POP_JUMP_IF_FALSE, Op.FOR_RANGE_NEXT})
BACKWARD_JUMPS = frozenset({Op.JUMP_BACKWARD})
JUMPS = FORWARD_JUMPS | BACKWARD_JUMPS
TERMINATORS = frozenset({Op.JUMP_FORWARD, Op.JUMP_BACKWARD, Op.RETURN_VALUE, Op.RETURN_CONST, Op.RAISE})
CONST_OPERANDS = frozenset({Op.LOAD_CONST, Op.RETURN_CONST, Op.MAKE_FUNCTION, Op.PROBE, Op.MATCH_LITERAL})
NAME_OPERANDS = frozenset({Op.LOAD_NAME, Op.STORE_NAME})

_OPCODES = {op.value: op for op in Op}


def extended_args_needed(arg: int) -> int:
    """Number of EXTENDED_ARG prefixes needed to carry `arg`."""
    if arg < 0:
        raise CompileError(f"negative operand {arg}")
    if arg > MAX_ARG:
        raise CompileError(f"operand {arg:#x} needs more than {MAX_EXTENDED_ARGS} EXTENDED_ARG prefixes")
    count = 0
    while arg > 0xFF:
        arg >>= 8
        count += 1
    return count


def encode_instruction(op: Op, arg: int = 0, prefixes: int = 0) -> bytes:
    """Encode one instruction, padding to at least `prefixes` EXTENDED_ARG units."""
    needed = max(extended_args_needed(arg), prefixes)
    if needed > MAX_EXTENDED_ARGS:
        raise CompileError(f"{op.name} cannot take {needed} EXTENDED_ARG prefixes")
    out = bytearray()
    for shift in range(needed, 0, -1):
        out += bytes((Op.EXTENDED_ARG, (arg >> (8 * shift)) & 0xFF))
    out += bytes((op, arg & 0xFF))
    return bytes(out)


@dataclass(frozen=True)
class DecodedInstruction:
    offset: int        # byte offset of the first prefix
    op: Op
    arg: int
    prefixes: int

    @property
    def size(self) -> int:
        return UNIT * (self.prefixes + 1)

    @property
    def end(self) -> int:
        return self.offset + self.size

    @property
    def op_offset(self) -> int:
        """Byte offset of the opcode unit itself, past any prefixes."""
        return self.end - UNIT

    def jump_target(self) -> int:
        """Absolute byte offset this jump lands on."""
        if self.op in FORWARD_JUMPS:
            return self.end + UNIT * self.arg
        if self.op in BACKWARD_JUMPS:
            return self.end - UNIT * self.arg
        raise ValueError(f"{self.op.name} is not a jump")


def decode(code: bytes) -> Iterator[DecodedInstruction]:
    """Walk whole instructions; malformed bytes raise MalformedCodeError with the offset."""
    if len(code) % UNIT:
        raise MalformedCodeError("code length is not a whole number of units", len(code) - 1)
    offset = 0
    while offset < len(code):
        start = offset
        arg = 0
        prefixes = 0
        while True:
            raw = code[offset]
            op = _OPCODES.get(raw)
            if op is None:
                raise MalformedCodeError(f"unknown opcode {raw}", offset)
            arg = (arg << 8) | code[offset + 1]
            offset += UNIT
            if op != Op.EXTENDED_ARG:
                break
            prefixes += 1
            if prefixes > MAX_EXTENDED_ARGS:
                raise MalformedCodeError("more than three EXTENDED_ARG prefixes", start)
            if offset >= len(code):
                raise MalformedCodeError("EXTENDED_ARG at end of code", offset - UNIT)
        yield DecodedInstruction(start, op, arg, prefixes)


def stack_effect(op: Op, arg: int, jump: bool = False) -> int:
    """Net stack change of `op`, on the jump edge when `jump` is set."""
    if op in (Op.LOAD_CONST, Op.LOAD_NAME, Op.MAKE_FUNCTION, Op.MATCH_LITERAL):
        return 1
    if op in (Op.STORE_NAME, Op.POP_TOP, Op.BINARY_OP, Op.COMPARE_OP, Op.POP_JUMP_IF_FALSE, Op.RETURN_VALUE):
        return -1
    if op == Op.BUILD_TUPLE:
        return 1 - arg
    if op == Op.CALL:
        return -arg
    if op == Op.FOR_RANGE_NEXT:
        return -1 if jump else 1
    return 0


def stack_inputs(op: Op, arg: int) -> int:
    """Minimum depth `op` needs before it runs."""
    if op in (Op.STORE_NAME, Op.POP_TOP, Op.UNARY_NEG, Op.UNARY_NOT, Op.POP_JUMP_IF_FALSE,
              Op.RETURN_VALUE, Op.PRINT, Op.GET_RANGE_ITER, Op.FOR_RANGE_NEXT, Op.MATCH_LITERAL):
        return 1
    if op in (Op.BINARY_OP, Op.COMPARE_OP):
        return 2
    if op == Op.BUILD_TUPLE:
        return arg
    if op == Op.CALL:
        return arg + 1
    return 0
