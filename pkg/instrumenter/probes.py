"""
Static phase: probe insertion.

A probe is the two-instruction sequence

    NOP(skip)  [EXTENDED_ARG ...] PROBE(k)

where consts[k] is the probe's ProbeHandle and `skip` is the byte length of
the PROBE instruction. Line probes go in front of the first line table entry
of every coverable line of a code object; branch probes replace the
`_branch = (origin, dest)` idiom left by the branch transform.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from models.data_models import CoverageMode
from models.errors import CompileError, InstrumentationError, RelocationError

from compiler.assembly import Instr
from compiler.code_object import CodeObject, ProbeHandle
from compiler.isa import UNIT, Op, extended_args_needed
from compiler.verifier import verify
from frontend.parser import RESERVED_NAME
from frontend.universe import CoverableUniverse
from utils.log import get_logger

from .relocation import Edit, Lifted, lift, rebuild

logger = get_logger("Instrumenter")


class ProbeKind(str, Enum):
    LINE = "line"
    BRANCH = "branch"


Payload = Union[int, tuple[int, int]]


@dataclass(frozen=True)
class ProbeSite:
    probe_id: int
    kind: ProbeKind
    payload: Payload
    module: str
    code_path: tuple[int, ...]
    offset: int              # byte offset of the NOP header

    @property
    def fact(self) -> tuple:
        """The coverage fact this probe reports."""
        if self.kind == ProbeKind.LINE:
            return (self.module, self.payload)
        origin, dest = self.payload
        return (self.module, origin, dest)


@dataclass
class InstrumentationMap:
    """Probe id -> site, and (module, code path) -> current owning CodeObject."""
    sites: dict[int, ProbeSite] = field(default_factory=dict)
    owners: dict[tuple[str, tuple], CodeObject] = field(default_factory=dict)
    next_id: int = 0
    relocation_rounds: int = 0   # most fixpoint rounds any rewrite needed

    def allocate(self) -> int:
        probe_id = self.next_id
        self.next_id += 1
        return probe_id

    def site(self, probe_id: int) -> ProbeSite:
        return self.sites[probe_id]

    def owner(self, module: str, path: tuple) -> CodeObject:
        return self.owners[(module, path)]

    def root(self, module: str) -> CodeObject:
        return self.owners[(module, ())]


def make_probe(const_index: int) -> list[Instr]:
    probe = Instr(Op.PROBE, const_index, prefixes=extended_args_needed(const_index))
    return [Instr(Op.NOP, probe.size), probe]


def marker_payload(code: CodeObject, first: Instr, second: Instr) -> Optional[tuple[int, int]]:
    """(origin, dest) when `first; second` is the LOAD_CONST/STORE_NAME marker idiom."""
    if first.op != Op.LOAD_CONST or second.op != Op.STORE_NAME:
        return None
    if second.arg >= len(code.names) or code.names[second.arg] != RESERVED_NAME:
        return None
    value = code.consts[first.arg] if first.arg < len(code.consts) else None
    if isinstance(value, tuple) and len(value) == 2 and all(type(v) is int for v in value):
        return value
    return None


class _Rewriter:
    def __init__(
        self,
        universe: Optional[CoverableUniverse],
        mode: Optional[CoverageMode],
        probe_map: InstrumentationMap,
        module: str,
    ):
        self.universe = universe
        self.mode = mode
        self.probe_map = probe_map
        self.module = module

    @property
    def insert_line_probes(self) -> bool:
        return self.mode is not None

    @property
    def insert_branch_probes(self) -> bool:
        return self.mode == CoverageMode.BRANCH

    def rewrite(self, code: CodeObject, path: tuple = ()) -> CodeObject:
        consts = list(code.consts)
        for index, child in code.children():
            consts[index] = self.rewrite(child, path + (index,))

        try:
            lifted = lift(code.code)
        except CompileError as exc:
            raise InstrumentationError(code.name, str(exc)) from exc
        edits: dict[int, Edit] = {}
        planned: list[tuple[int, Instr, ProbeKind, Payload]] = []

        def add_probe(at: Instr, kind: ProbeKind, payload: Payload) -> None:
            probe_id = self.probe_map.allocate()
            consts.append(ProbeHandle(probe_id))
            seq = make_probe(len(consts) - 1)
            edits.setdefault(id(at), Edit()).before.extend(seq)
            planned.append((probe_id, seq[0], kind, payload))

        if self.insert_line_probes:
            seen: set[int] = set()
            for offset, line in code.line_table:
                if line in seen or not line:
                    continue
                seen.add(line)
                if self.universe is not None and (self.module, line) not in self.universe.lines:
                    continue
                add_probe(lifted.by_offset[offset], ProbeKind.LINE, line)

        for first, second in zip(lifted.instrs, lifted.instrs[1:]):
            payload = marker_payload(code, first, second)
            if payload is None:
                continue
            if self.insert_branch_probes:
                add_probe(first, ProbeKind.BRANCH, payload)
            edits.setdefault(id(first), Edit()).delete = True
            edits.setdefault(id(second), Edit()).delete = True

        if not edits:
            return code if consts == list(code.consts) else code.replace(consts=tuple(consts))
        rebuilt = self._rebuild(code, lifted, edits)

        new_code = code.replace(
            code=rebuilt.code,
            consts=tuple(consts),
            line_table=rebuilt.line_table,
            exc_table=rebuilt.exc_table,
        )
        violations = verify(new_code, recursive=False)
        if violations:
            raise InstrumentationError(code.name, "; ".join(str(v) for v in violations[:5]))

        for probe_id, header, kind, payload in planned:
            self.probe_map.sites[probe_id] = ProbeSite(
                probe_id=probe_id,
                kind=kind,
                payload=payload,
                module=self.module,
                code_path=path,
                offset=rebuilt.assembled.offset_of(header),
            )
        self.probe_map.owners[(self.module, path)] = new_code
        self.probe_map.relocation_rounds = max(self.probe_map.relocation_rounds, rebuilt.assembled.iterations)
        logger.debug(
            "%s %s: %d probes, %d relocation rounds",
            self.module, code.name, len(planned), rebuilt.assembled.iterations,
        )
        return new_code

    @staticmethod
    def _rebuild(code: CodeObject, lifted: Lifted, edits: dict[int, Edit]):
        try:
            return rebuild(lifted, edits, code.line_table, code.exc_table)
        except RelocationError:
            raise
        except CompileError as exc:
            raise InstrumentationError(code.name, str(exc)) from exc


def _register_owners(probe_map: InstrumentationMap, module: str, root: CodeObject) -> None:
    for path, code in root.walk():
        probe_map.owners[(module, path)] = code


def insert_probes(
    code: CodeObject,
    universe: Optional[CoverableUniverse],
    mode: CoverageMode,
    probe_map: Optional[InstrumentationMap] = None,
    module: Optional[str] = None,
) -> tuple[CodeObject, InstrumentationMap]:
    """
    Instrument a code-object tree for `mode`, children first.

    Line probes are inserted for every line the universe lists for `module`
    (every line-table line when no universe is given). In line mode branch
    markers are deleted instead of converted.
    """
    probe_map = probe_map if probe_map is not None else InstrumentationMap()
    module = module or code.source
    instrumented = _Rewriter(universe, mode, probe_map, module).rewrite(code)
    _register_owners(probe_map, module, instrumented)
    return instrumented, probe_map


def strip_markers(code: CodeObject) -> CodeObject:
    """Remove every `_branch = (origin, dest)` idiom and relocate."""
    return _Rewriter(None, None, InstrumentationMap(), code.source).rewrite(code)


def probe_header_skip(code: CodeObject, offset: int) -> int:
    """Bytes a probe header at `offset` skips, for NOP and eliminated forms alike."""
    op, arg = code.code[offset], code.code[offset + 1]
    if op == Op.NOP:
        return arg
    if op == Op.JUMP_FORWARD:
        return arg * UNIT
    raise InstrumentationError(code.name, f"no probe header at offset {offset}")
