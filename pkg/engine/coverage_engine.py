"""
Dynamic phase: probe firing protocol and batched probe elimination.

First fire of a probe records its fact and sets the probe's no-record flag.
Later fires only count; once a counter reaches the threshold every recorded,
not yet eliminated probe is removed in one batch by rewriting its NOP header
into a JUMP_FORWARD of the same length. Rewritten code objects replace their
predecessors children first and are published to the function registry, so
the next call of a function runs the probe-free code while frames already
running keep their old code.
"""
import threading
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from models.data_models import CoverageMode, Deinstrumentation, EngineStats
from models.errors import CoverageEngineError, VerificationError

from compiler.code_object import CodeObject
from compiler.isa import UNIT, Op
from compiler.verifier import check
from frontend.universe import CoverableUniverse
from instrumenter.probes import InstrumentationMap, ProbeSite, insert_probes, probe_header_skip
from utils.log import get_logger
from vm.registry import FunctionRegistry

logger = get_logger("CoverageEngine")


@dataclass(eq=False)
class ProbeState:
    site: ProbeSite
    no_record: bool = False
    counter: int = 0
    eliminated: bool = False
    fact: tuple = field(init=False)

    def __post_init__(self):
        self.fact = self.site.fact

    @property
    def probe_id(self) -> int:
        return self.site.probe_id


@dataclass
class CoverageStore:
    known: set = field(default_factory=set)
    newly_covered: set = field(default_factory=set)
    threshold: int = 64

    def covered(self) -> frozenset:
        return frozenset(self.known | self.newly_covered)


class CoverageEngine:
    """
    Probe sink of the VM.

    `fire` is bound at construction to the protocol of the selected
    de-instrumentation mode:
      full      - record, suppress, count, eliminate in batches
      flag-only - record and suppress, then only count
      none      - record on every fire
    """

    def __init__(
        self,
        registry: Optional[FunctionRegistry] = None,
        threshold: int = 64,
        deinstrumentation: Deinstrumentation = Deinstrumentation.FULL,
        debug: bool = False,
    ):
        if threshold < 1:
            raise CoverageEngineError(f"threshold must be positive, got {threshold}")
        self.registry = registry if registry is not None else FunctionRegistry()
        self.deinstrumentation = deinstrumentation
        self.debug = debug
        self.probe_map = InstrumentationMap()
        self.store = CoverageStore(threshold=threshold)
        self._lock = threading.Lock()
        self._states: list[ProbeState] = []
        self._pending: list[ProbeState] = []

        self._fires = 0
        self._first_fires = 0
        self._batches = 0
        self._rewritten = 0
        self._eliminated = 0
        self._stale_fires = 0
        self._skip_violations = 0

        self.fire = {
            Deinstrumentation.FULL: self._fire_full,
            Deinstrumentation.FLAG_ONLY: self._fire_flag_only,
            Deinstrumentation.NONE: self._fire_always_record,
        }[deinstrumentation]

    @property
    def threshold(self) -> int:
        return self.store.threshold

    # -- static phase --------------------------------------------------

    def instrument(
        self,
        code: CodeObject,
        universe: Optional[CoverableUniverse],
        mode: CoverageMode,
        module: Optional[str] = None,
    ) -> CodeObject:
        """Insert probes into a module's tree, create their states and publish every code object."""
        module = module or code.source
        instrumented, _ = insert_probes(code, universe, mode, self.probe_map, module)
        for probe_id in range(len(self._states), self.probe_map.next_id):
            self._states.append(ProbeState(self.probe_map.site(probe_id)))
        for path, owned in instrumented.walk():
            self.registry.publish(module, path, owned)
        logger.debug("%s: %d probes so far", module, len(self._states))
        return instrumented

    def state(self, probe_id: int) -> ProbeState:
        try:
            return self._states[probe_id]
        except IndexError:
            raise CoverageEngineError(f"unknown probe id {probe_id}") from None

    # -- firing protocols ----------------------------------------------

    def _fire_full(self, probe_id: int) -> None:
        state = self.state(probe_id)
        self._fires += 1
        if state.eliminated:
            self._stale_fire(state)
            return
        if not state.no_record:
            with self._lock:
                self.store.newly_covered.add(state.fact)
            state.no_record = True
            self._first_fires += 1
            self._pending.append(state)
            return
        state.counter += 1
        if state.counter >= self.store.threshold:
            self.eliminate_batch()
            state.counter = 0

    def _fire_flag_only(self, probe_id: int) -> None:
        state = self.state(probe_id)
        self._fires += 1
        if state.no_record:
            state.counter += 1
            return
        with self._lock:
            self.store.newly_covered.add(state.fact)
        state.no_record = True
        self._first_fires += 1

    def _fire_always_record(self, probe_id: int) -> None:
        state = self.state(probe_id)
        self._fires += 1
        with self._lock:
            self.store.newly_covered.add(state.fact)

    def _stale_fire(self, state: ProbeState) -> None:
        self._stale_fires += 1
        if self.debug:
            logger.warning("probe %d fired after elimination (frame on superseded code)", state.probe_id)

    # -- elimination ---------------------------------------------------

    def eliminate_batch(self) -> int:
        """Merge newly covered facts and jump over every recorded probe; returns probes eliminated."""
        with self._lock:
            swapped, self.store.newly_covered = self.store.newly_covered, set()
            self.store.known |= swapped
        pending, self._pending = self._pending, []
        self._batches += 1

        patches: dict[str, dict[tuple, list[ProbeState]]] = defaultdict(lambda: defaultdict(list))
        for state in pending:
            if not state.eliminated:
                patches[state.site.module][state.site.code_path].append(state)
        if not patches:
            logger.debug("batch %d: nothing to eliminate", self._batches)
            return 0

        eliminated = 0
        for module, by_path in patches.items():
            touched = {path[:depth] for path in by_path for depth in range(len(path) + 1)}
            rewritten: list[tuple[tuple, CodeObject]] = []
            root = self.probe_map.root(module)
            self._rewrite(module, root, (), by_path, touched, rewritten)
            for path, new_code in rewritten:
                self.probe_map.owners[(module, path)] = new_code
                self.registry.publish(module, path, new_code)
            for states in by_path.values():
                for state in states:
                    state.eliminated = True
                    eliminated += 1
            self._rewritten += len(rewritten)

        self._eliminated += eliminated
        logger.debug("batch %d: %d probes eliminated", self._batches, eliminated)
        return eliminated

    def _rewrite(
        self,
        module: str,
        code: CodeObject,
        path: tuple,
        by_path: dict[tuple, list[ProbeState]],
        touched: set[tuple],
        rewritten: list[tuple[tuple, CodeObject]],
    ) -> CodeObject:
        if path not in touched:
            return code
        consts = list(code.consts)
        for index, child in code.children():
            consts[index] = self._rewrite(module, child, path + (index,), by_path, touched, rewritten)

        data = code.code
        states = by_path.get(path)
        if states:
            patched = bytearray(data)
            for state in states:
                offset = state.site.offset
                if patched[offset] != Op.NOP:
                    raise CoverageEngineError(
                        f"probe {state.probe_id} of {code.name}: no NOP header at offset {offset}"
                    )
                skip = probe_header_skip(code, offset)
                patched[offset] = Op.JUMP_FORWARD
                patched[offset + 1] = skip // UNIT
            data = bytes(patched)

        new_code = code.replace(code=data, consts=tuple(consts))
        try:
            check(new_code, recursive=False)
        except VerificationError as exc:
            raise CoverageEngineError(f"elimination produced unverifiable code: {exc}") from exc
        rewritten.append((path, new_code))
        return new_code

    # -- reporting -----------------------------------------------------

    def snapshot(self) -> frozenset:
        """Covered facts so far; known and newly covered together."""
        with self._lock:
            return self.store.covered()

    def check_skip(self, code: CodeObject, header_unit: int, target_unit: int) -> None:
        """An eliminated probe's jump must land right after its PROBE instruction."""
        expected = code.program.ops[header_unit + 1][2]
        if target_unit != expected:
            self._skip_violations += 1
            logger.warning(
                "%s: eliminated probe at offset %d jumped to %d, expected %d",
                code.name, header_unit * UNIT, target_unit * UNIT, expected * UNIT,
            )

    def stats(self) -> EngineStats:
        return EngineStats(
            probes_inserted=len(self._states),
            fires=self._fires,
            first_fires=self._first_fires,
            batches=self._batches,
            rewritten_code_objects=self._rewritten,
            eliminated=self._eliminated,
            stale_fires=self._stale_fires,
            skip_violations=self._skip_violations,
        )
