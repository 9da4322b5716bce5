"""
Structural checks on CodeObjects.

verify() never raises for a bad code object; it returns the violations it
found. Callers that must not run unverified code use check(), which raises
VerificationError.
"""
from dataclasses import dataclass, field
from typing import Optional

from models.errors import MalformedCodeError, VerificationError

from .code_object import CodeObject, ProbeHandle
from .isa import (
    CONST_OPERANDS,
    JUMPS,
    NAME_OPERANDS,
    TERMINATORS,
    UNIT,
    DecodedInstruction,
    Op,
    decode,
    stack_effect,
    stack_inputs,
)
from frontend.semantics import BINARY_OPERATORS, COMPARE_OPERATORS


@dataclass(frozen=True)
class Violation:
    offset: Optional[int]
    message: str
    code_name: str = ""

    def __str__(self) -> str:
        where = f" at offset {self.offset}" if self.offset is not None else ""
        owner = f"{self.code_name}: " if self.code_name else ""
        return f"{owner}{self.message}{where}"


@dataclass
class StackAnalysis:
    depths: dict[int, int] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)


def _decode_all(code: CodeObject, violations: list[Violation]) -> list[DecodedInstruction]:
    instrs: list[DecodedInstruction] = []
    try:
        for instr in decode(code.code):
            instrs.append(instr)
    except MalformedCodeError as exc:
        violations.append(Violation(exc.offset, exc.message))
    return instrs


def _successors(instr: DecodedInstruction) -> list[tuple[int, int]]:
    """(offset, depth change) of every normal-flow successor."""
    op = instr.op
    out = []
    if op in JUMPS:
        out.append((instr.jump_target(), stack_effect(op, instr.arg, jump=True)))
    if op not in TERMINATORS:
        out.append((instr.end, stack_effect(op, instr.arg)))
    return out


def analyze_stack(code: CodeObject, instrs: Optional[list[DecodedInstruction]] = None) -> StackAnalysis:
    """Abstract interpretation of stack depth over normal and exception edges."""
    analysis = StackAnalysis()
    if instrs is None:
        instrs = _decode_all(code, analysis.violations)
    by_offset = {i.offset: i for i in instrs}
    depths = analysis.depths
    if not instrs:
        return analysis

    def seed(offset: int, depth: int, source: int) -> None:
        if offset not in by_offset:
            return
        known = depths.get(offset)
        if known is None:
            depths[offset] = depth
            worklist.append(offset)
        elif known != depth:
            analysis.violations.append(
                Violation(offset, f"inconsistent stack depth ({known} vs {depth} from {source})")
            )

    worklist: list[int] = []
    seed(0, 0, 0)
    seeded_handlers: set[int] = set()
    while True:
        while worklist:
            offset = worklist.pop()
            instr = by_offset[offset]
            depth = depths[offset]
            needed = stack_inputs(instr.op, instr.arg)
            if depth < needed:
                analysis.violations.append(Violation(offset, f"stack underflow in {instr.op.name}"))
                continue
            if instr.op == Op.RETURN_VALUE and depth != 1:
                analysis.violations.append(Violation(offset, f"RETURN_VALUE with stack depth {depth}"))
            if instr.op == Op.RETURN_CONST and depth != 0:
                analysis.violations.append(Violation(offset, f"RETURN_CONST with stack depth {depth}"))
            for succ, delta in _successors(instr):
                seed(succ, depth + delta, offset)
        progressed = False
        for index, (start, _end, handler) in enumerate(code.exc_table):
            if index not in seeded_handlers and start in depths:
                seeded_handlers.add(index)
                seed(handler, depths[start], start)
                progressed = True
        if not progressed:
            break
    return analysis


def verify(code: CodeObject, recursive: bool = True) -> list[Violation]:
    """Every violation of the CodeObject invariants; empty means ok."""
    violations: list[Violation] = []
    instrs = _decode_all(code, violations)
    size = len(code.code)
    boundaries = {i.offset for i in instrs}
    if not instrs and size == 0:
        violations.append(Violation(None, "empty code"))

    # Probe sequences: a NOP/JUMP_FORWARD header followed by PROBE; the PROBE
    # instruction is interior and must never be a jump target.
    interior: set[int] = set()
    for prev, instr in zip(instrs, instrs[1:]):
        if instr.op != Op.PROBE:
            continue
        interior.add(instr.offset)
        if prev.op == Op.NOP:
            skip = prev.arg
        elif prev.op == Op.JUMP_FORWARD:
            skip = prev.arg * UNIT
        else:
            violations.append(Violation(instr.offset, "PROBE without a probe header"))
            continue
        if skip != instr.size:
            violations.append(Violation(prev.offset, f"probe header skips {skip} bytes, sequence has {instr.size}"))
    if instrs and instrs[0].op == Op.PROBE:
        violations.append(Violation(0, "PROBE without a probe header"))

    for instr in instrs:
        op, arg = instr.op, instr.arg
        if op in JUMPS:
            target = instr.jump_target()
            if target < 0 or target >= size:
                violations.append(Violation(instr.offset, f"jump target {target} outside code"))
            elif target not in boundaries:
                violations.append(Violation(instr.offset, f"target not on boundary ({target})"))
            elif target in interior:
                violations.append(Violation(instr.offset, f"jump into probe sequence ({target})"))
        if op in CONST_OPERANDS:
            if arg >= len(code.consts):
                violations.append(Violation(instr.offset, f"const index {arg} out of range"))
            elif op == Op.MAKE_FUNCTION and not isinstance(code.consts[arg], CodeObject):
                violations.append(Violation(instr.offset, "MAKE_FUNCTION operand is not a code object"))
            elif op == Op.PROBE and not isinstance(code.consts[arg], ProbeHandle):
                violations.append(Violation(instr.offset, "PROBE operand is not a probe handle"))
        if op in NAME_OPERANDS and arg >= len(code.names):
            violations.append(Violation(instr.offset, f"name index {arg} out of range"))
        if op == Op.BINARY_OP and arg >= len(BINARY_OPERATORS):
            violations.append(Violation(instr.offset, f"unknown binary operator {arg}"))
        if op == Op.COMPARE_OP and arg >= len(COMPARE_OPERATORS):
            violations.append(Violation(instr.offset, f"unknown comparison {arg}"))
    if instrs and instrs[-1].op not in TERMINATORS:
        violations.append(Violation(instrs[-1].offset, "execution can fall off the end of the code"))

    previous = -1
    for offset, line in code.line_table:
        if offset <= previous:
            violations.append(Violation(offset, "line table offsets not strictly increasing"))
        if offset not in boundaries:
            violations.append(Violation(offset, "line table entry not on boundary"))
        if line < 0:
            violations.append(Violation(offset, f"line {line} is negative"))
        previous = offset

    for start, end, handler in code.exc_table:
        if not start < end <= size:
            violations.append(Violation(start, f"malformed exception range [{start}, {end})"))
        if start not in boundaries or (end not in boundaries and end != size):
            violations.append(Violation(start, "exception range not on boundaries"))
        if handler not in boundaries:
            violations.append(Violation(handler, "handler not on boundary"))
        elif handler in interior:
            violations.append(Violation(handler, "handler inside probe sequence"))

    violations.extend(analyze_stack(code, instrs).violations)
    violations = [Violation(v.offset, v.message, code.name) for v in violations]

    if recursive:
        for _, child in code.children():
            violations.extend(verify(child, recursive=True))
    return violations


def check(code: CodeObject, recursive: bool = True) -> CodeObject:
    """Return `code` unchanged, or raise VerificationError listing its violations."""
    violations = verify(code, recursive=recursive)
    if violations:
        raise VerificationError(code.name, violations)
    return code
