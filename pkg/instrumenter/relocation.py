"""
Rewriting word-code with inserted and deleted instructions.

Code is lifted into symbolic instructions whose jumps point at instruction
objects, edited, and reassembled by the width fixpoint in compiler.assembly.
Anything that referred to an original instruction (jump targets, line table
starts, exception ranges and handlers) moves to the first instruction of the
code inserted in front of it. A deleted instruction hands its references to
whatever comes next.
"""
from dataclasses import dataclass, field
from typing import Optional

from models.errors import CompileError

from compiler.assembly import Assembled, Instr, assemble
from compiler.isa import JUMPS, Op, decode


@dataclass
class Edit:
    before: list[Instr] = field(default_factory=list)
    delete: bool = False


@dataclass
class Lifted:
    instrs: list[Instr]
    by_offset: dict[int, Instr]
    size: int


@dataclass
class Rebuilt:
    assembled: Assembled
    instrs: list[Instr]
    line_table: tuple
    exc_table: tuple

    @property
    def code(self) -> bytes:
        return self.assembled.code


def lift(code: bytes) -> Lifted:
    """Decode `code` into Instr objects, keeping each instruction's prefix count."""
    instrs: list[Instr] = []
    by_offset: dict[int, Instr] = {}
    targets: list[tuple[Instr, int]] = []
    for decoded in decode(code):
        instr = Instr(decoded.op, decoded.arg, prefixes=decoded.prefixes, offset=decoded.offset)
        if decoded.op in JUMPS:
            targets.append((instr, decoded.jump_target()))
        instrs.append(instr)
        by_offset[decoded.offset] = instr
    for instr, target in targets:
        if target not in by_offset:
            raise CompileError(f"jump at offset {instr.offset} does not land on an instruction ({target})")
        instr.target = by_offset[target]
    return Lifted(instrs, by_offset, len(code))


def rebuild(
    lifted: Lifted,
    edits: dict[int, Edit],
    line_table: tuple = (),
    exc_table: tuple = (),
    max_iterations: Optional[int] = None,
) -> Rebuilt:
    """Apply `edits` (keyed by id of the original Instr) and reassemble."""
    out: list[Instr] = []
    anchor: dict[int, Optional[Instr]] = {}
    orphans: list[Instr] = []
    for instr in lifted.instrs:
        edit = edits.get(id(instr))
        before = edit.before if edit else []
        deleted = bool(edit and edit.delete)
        out.extend(before)
        if not deleted:
            out.append(instr)
        first = before[0] if before else (None if deleted else instr)
        if first is None:
            orphans.append(instr)
            continue
        for orphan in orphans:
            anchor[id(orphan)] = first
        orphans.clear()
        anchor[id(instr)] = first
    for orphan in orphans:
        anchor[id(orphan)] = None

    for instr in out:
        if instr.target is not None and id(instr.target) in anchor:
            moved = anchor[id(instr.target)]
            if moved is None:
                raise CompileError(f"{instr.op.name} would jump past the end of the code")
            instr.target = moved

    assembled = assemble(out) if max_iterations is None else assemble(out, max_iterations)
    end = len(assembled.code)

    def new_offset(old: int) -> int:
        if old >= lifted.size:
            return end
        moved = anchor[id(lifted.by_offset[old])]
        return end if moved is None else assembled.offset_of(moved)

    lines: list[tuple[int, int]] = []
    for offset, line in line_table:
        moved = new_offset(offset)
        if moved >= end:
            continue
        if lines and lines[-1][0] == moved:
            lines[-1] = (moved, line)
        else:
            lines.append((moved, line))

    ranges = []
    for start, stop, handler in exc_table:
        new_start, new_stop = new_offset(start), new_offset(stop)
        if new_start < new_stop:
            ranges.append((new_start, new_stop, new_offset(handler)))

    return Rebuilt(assembled, out, tuple(lines), tuple(ranges))


def relocate(code: bytes, insertions: list[tuple[int, int]]) -> Rebuilt:
    lifted = lift(code)
    edits: dict[int, Edit] = {}
    tail: list[Instr] = []
    for offset, units in insertions:
        filler = [Instr(Op.NOP) for _ in range(units)]
        if offset >= lifted.size:
            tail.extend(filler)
            continue
        if offset not in lifted.by_offset:
            raise CompileError(f"insertion at offset {offset} is not on an instruction boundary")
        edits.setdefault(id(lifted.by_offset[offset]), Edit()).before.extend(filler)
    rebuilt = rebuild(lifted, edits)
    if tail:
        rebuilt.instrs.extend(tail)
        rebuilt.assembled = assemble(rebuilt.instrs)
    return rebuilt


def relocate_jumps(code: bytes, insertions: list[tuple[int, int]]) -> bytes:
    """Insert NOP filler (byte offset, code units) and re-resolve every jump."""
    return relocate(code, insertions).code
