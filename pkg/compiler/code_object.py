"""
Immutable compiled units.
"""
import bisect
import dataclasses
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterator, Optional

from .isa import CONST_OPERANDS, JUMPS, UNIT, Op, decode


@dataclass(frozen=True)
class ProbeHandle:
    """Constant that tells the PROBE opcode which probe fired."""
    probe_id: int

    def __repr__(self) -> str:
        return f"<probe {self.probe_id}>"


@dataclass(frozen=True)
class Program:
    """Pre-decoded form of a CodeObject, indexed by code unit."""
    ops: list              # unit -> (op, operand, next unit) at boundaries, else None
    lines: list            # unit -> source line in effect
    handlers: tuple        # (start unit, end unit, handler unit, stack depth), innermost first
    probe_skips: frozenset # units of eliminated probe headers


@dataclass(frozen=True, repr=False)
class CodeObject:
    name: str
    source: str
    code: bytes
    consts: tuple = ()
    names: tuple = ()
    argnames: tuple = ()
    line_table: tuple = ()      # ((byte offset, line), ...), offsets strictly increasing, line 0 = no line
    exc_table: tuple = ()       # ((start, end, handler), ...) byte offsets, innermost first
    first_line: int = 1

    def __repr__(self) -> str:
        return f"<code {self.name}, {self.source}:{self.first_line}>"

    def replace(self, **changes: Any) -> "CodeObject":
        return dataclasses.replace(self, **changes)

    def children(self) -> Iterator[tuple[int, "CodeObject"]]:
        for index, const in enumerate(self.consts):
            if isinstance(const, CodeObject):
                yield index, const

    def walk(self, path: tuple = ()) -> Iterator[tuple[tuple, "CodeObject"]]:
        """Every code object of the tree with its const-index path from here."""
        yield path, self
        for index, child in self.children():
            yield from child.walk(path + (index,))

    def at_path(self, path: tuple) -> "CodeObject":
        code = self
        for index in path:
            code = code.consts[index]
        return code

    def line_at(self, offset: int) -> Optional[int]:
        starts = [entry[0] for entry in self.line_table]
        pos = bisect.bisect_right(starts, offset) - 1
        return self.line_table[pos][1] if pos >= 0 else None

    def probe_ids(self) -> list[int]:
        return [c.probe_id for c in self.consts if isinstance(c, ProbeHandle)]

    @cached_property
    def program(self) -> Program:
        from .verifier import analyze_stack

        units = len(self.code) // UNIT
        ops: list = [None] * units
        lines: list = [None] * units
        previous = None
        skips = set()
        for instr in decode(self.code):
            unit = instr.offset // UNIT
            nxt = instr.end // UNIT
            op = instr.op
            if op in JUMPS:
                operand = instr.jump_target() // UNIT
            elif op == Op.PROBE:
                operand = self.consts[instr.arg].probe_id
                if previous is not None and previous.op == Op.JUMP_FORWARD:
                    skips.add(previous.offset // UNIT)
            elif op in CONST_OPERANDS and op != Op.MAKE_FUNCTION:
                operand = self.consts[instr.arg]
            elif op in (Op.LOAD_NAME, Op.STORE_NAME):
                operand = self.names[instr.arg]
            else:
                operand = instr.arg
            ops[unit] = (int(op), operand, nxt)
            previous = instr

        for index, (start, line) in enumerate(self.line_table):
            stop = self.line_table[index + 1][0] if index + 1 < len(self.line_table) else len(self.code)
            for unit in range(start // UNIT, stop // UNIT):
                lines[unit] = line

        analysis = analyze_stack(self)
        handlers = tuple(
            (start // UNIT, end // UNIT, handler // UNIT, analysis.depths.get(start, 0))
            for start, end, handler in self.exc_table
        )
        return Program(ops, lines, handlers, frozenset(skips))
