"""
Symbolic instruction lists and the assembler that lays them out.

Jumps hold a reference to their target instruction rather than an operand.
`assemble` places every instruction, recomputes jump operands and widens
operands that no longer fit, repeating until no width changes. Widths only
ever grow, so the loop terminates within a few rounds; the iteration guard
turns anything else into a RelocationError.
"""
from dataclasses import dataclass, field
from typing import Optional

from models.errors import CompileError, RelocationError

from .isa import BACKWARD_JUMPS, FORWARD_JUMPS, JUMPS, UNIT, Op, encode_instruction, extended_args_needed

MAX_RELOCATION_ITERATIONS = 8


@dataclass(eq=False)
class Instr:
    op: Op
    arg: int = 0
    target: Optional["Instr"] = None
    prefixes: int = 0
    offset: int = -1

    @property
    def size(self) -> int:
        return UNIT * (self.prefixes + 1)

    @property
    def is_jump(self) -> bool:
        return self.op in JUMPS

    def __repr__(self) -> str:
        where = f"@{self.offset}" if self.offset >= 0 else ""
        return f"Instr({self.op.name}, {self.arg}{where})"


@dataclass
class Assembled:
    code: bytes
    iterations: int
    offsets: dict[int, int] = field(default_factory=dict)   # id(Instr) -> byte offset

    def offset_of(self, instr: Instr) -> int:
        return self.offsets[id(instr)]


def _relative_operand(instr: Instr) -> int:
    end_units = (instr.offset + instr.size) // UNIT
    target_units = instr.target.offset // UNIT
    if instr.op in FORWARD_JUMPS:
        span = target_units - end_units
    elif instr.op in BACKWARD_JUMPS:
        span = end_units - target_units
    else:
        raise CompileError(f"{instr.op.name} cannot carry a jump target")
    if span < 0:
        raise CompileError(f"{instr.op.name} at offset {instr.offset} points the wrong way")
    return span


def layout(instrs: list[Instr]) -> int:
    offset = 0
    for instr in instrs:
        instr.offset = offset
        offset += instr.size
    return offset


def assemble(instrs: list[Instr], max_iterations: int = MAX_RELOCATION_ITERATIONS) -> Assembled:
    """Resolve jumps to a width fixpoint and emit the code bytes."""
    for instr in instrs:
        if instr.is_jump and instr.target is None:
            raise CompileError(f"{instr.op.name} has no target")

    for iteration in range(1, max_iterations + 1):
        layout(instrs)
        changed = False
        for instr in instrs:
            if instr.target is not None:
                instr.arg = _relative_operand(instr)
            needed = extended_args_needed(instr.arg)
            if needed > instr.prefixes:
                instr.prefixes = needed
                changed = True
        if not changed:
            code = b"".join(encode_instruction(i.op, i.arg, i.prefixes) for i in instrs)
            return Assembled(code, iteration, {id(i): i.offset for i in instrs})

    raise RelocationError(f"jump widths still changing after {max_iterations} iterations")
