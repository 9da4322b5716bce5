"""
Module loader for multi-file Mini programs.

Turns `.mini` sources (or compiled `.minic` containers) into registered code
objects: parse, branch transform, compile, then instrument when the module
falls under the load policy. Every absolute path is processed once per
process; `load("x")` inside a running program goes through the same pipeline
while the VM waits.
"""
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

from models.data_models import LoadPolicy, RunMode
from models.errors import LoadError

from compiler.code_object import CodeObject
from compiler.codegen import compile_ast
from compiler.container import is_instrumented, read_container
from compiler.isa import Op, decode
from engine.coverage_engine import CoverageEngine
from frontend.ast_nodes import AstNode
from frontend.parser import RESERVED_NAME, parse
from frontend.universe import CoverableUniverse, enumerate_universe
from instrumenter.probes import strip_markers
from transform.branches import transform
from utils.log import get_logger
from vm.registry import FunctionRegistry

logger = get_logger("Loader")

SOURCE_SUFFIX = ".mini"
CONTAINER_SUFFIX = ".minic"


class ModuleState(str, Enum):
    LOADED = "loaded"
    EXECUTING = "executing"
    DONE = "done"


@dataclass
class LoadedModule:
    path: str
    code: CodeObject
    universe: CoverableUniverse
    instrumented: bool
    ast: Optional[AstNode] = None          # transformed tree, None for containers
    state: ModuleState = ModuleState.LOADED


def universe_from_code(code: CodeObject, module: str) -> CoverableUniverse:
    """Lines of every line table plus the payload of every branch marker left in the code."""
    universe = CoverableUniverse()
    for _, owned in code.walk():
        universe.lines.update((module, line) for _, line in owned.line_table if line)
        instrs = list(decode(owned.code))
        for first, second in zip(instrs, instrs[1:]):
            if first.op != Op.LOAD_CONST or second.op != Op.STORE_NAME:
                continue
            if owned.names[second.arg] != RESERVED_NAME:
                continue
            origin, dest = owned.consts[first.arg]
            universe.branches.add((module, origin, dest))
    return universe


def _with_source(code: CodeObject, source: str) -> CodeObject:
    """The tree of `code` attributed to `source`, for containers compiled elsewhere."""
    consts = tuple(_with_source(c, source) if isinstance(c, CodeObject) else c for c in code.consts)
    if code.source == source and consts == code.consts:
        return code
    return code.replace(source=source, consts=consts)


class ModuleLoader:
    """Loads, instruments and tracks the modules of one program run."""

    def __init__(
        self,
        policy: LoadPolicy,
        run_mode: RunMode = RunMode.PROBE_FULL,
        engine: Optional[CoverageEngine] = None,
        registry: Optional[FunctionRegistry] = None,
    ):
        if run_mode.uses_probes and engine is None:
            raise LoadError(f"run mode {run_mode.value} needs a coverage engine")
        self.policy = policy
        self.run_mode = run_mode
        self.engine = engine
        self.registry = registry if registry is not None else (engine.registry if engine else FunctionRegistry())
        self.universe = CoverableUniverse()
        self._modules: dict[str, LoadedModule] = {}
        self._executing: list[str] = []

    @property
    def modules(self) -> dict[str, LoadedModule]:
        return self._modules

    # -- path handling -------------------------------------------------

    @staticmethod
    def resolve(target: str, requesting_source: Optional[str] = None) -> Path:
        path = Path(target)
        if not path.suffix:
            path = path.with_suffix(SOURCE_SUFFIX)
        if not path.is_absolute() and requesting_source:
            path = Path(requesting_source).parent / path
        return path.resolve()

    # -- static phase --------------------------------------------------

    def load(self, path: str | Path) -> LoadedModule:
        """Load and register one module; cached by absolute path."""
        resolved = Path(path).resolve()
        key = str(resolved)
        if key in self._modules:
            return self._modules[key]
        if not resolved.is_file():
            raise LoadError(f"no such module: {resolved}", self._executing + [key])

        included = self.policy.includes(resolved)
        if resolved.suffix == CONTAINER_SUFFIX:
            loaded = self._load_container(resolved, included)
        else:
            loaded = self._load_source(resolved, included)
        self._modules[key] = loaded
        if included:
            self.universe.update(loaded.universe)
        logger.info(
            "%s: %s", key,
            "instrumented" if loaded.instrumented else ("tracked" if included else "not instrumented"),
        )
        return loaded

    def _load_source(self, path: Path, included: bool) -> LoadedModule:
        module = str(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise LoadError(f"cannot read {module}: {exc}", self._executing + [module]) from exc
        ast = parse(text, module)
        transformed = transform(ast)
        universe = enumerate_universe(transformed)
        if included and self.run_mode.uses_probes:
            code = self.engine.instrument(compile_ast(transformed), universe, self.policy.mode, module)
            return LoadedModule(module, code, universe, True, transformed)
        code = self._publish(module, compile_ast(ast))
        return LoadedModule(module, code, universe, False, transformed)

    def _load_container(self, path: Path, included: bool) -> LoadedModule:
        module = str(path)
        code = read_container(path)
        if is_instrumented(code):
            raise LoadError(f"{module} already holds probes", self._executing + [module])
        code = _with_source(code, module)
        universe = universe_from_code(code, module)
        if included and self.run_mode.uses_probes:
            code = self.engine.instrument(code, universe, self.policy.mode, module)
            return LoadedModule(module, code, universe, True)
        if universe.branches:
            code = strip_markers(code)
        return LoadedModule(module, self._publish(module, code), universe, False)

    def _publish(self, module: str, code: CodeObject) -> CodeObject:
        for path, owned in code.walk():
            self.registry.publish(module, path, owned)
        return code

    # -- dynamic phase -------------------------------------------------

    def begin(self, path: str | Path) -> tuple[CodeObject, str]:
        """Root module to execute: its newest code and its module name."""
        loaded = self.load(path)
        return self._enter(loaded), loaded.path

    def load_for_vm(self, target: str, requesting_source: str) -> Optional[tuple[CodeObject, str]]:
        """Hook behind `load()`: code to run as a module frame, or None when the module already ran."""
        loaded = self.load(self.resolve(target, requesting_source))
        if loaded.state == ModuleState.EXECUTING:
            raise LoadError(f"load cycle through {loaded.path}", self._executing + [loaded.path])
        if loaded.state == ModuleState.DONE:
            return None
        return self._enter(loaded), loaded.path

    def _enter(self, loaded: LoadedModule) -> CodeObject:
        loaded.state = ModuleState.EXECUTING
        self._executing.append(loaded.path)
        return self.registry.latest(loaded.path, ()) or loaded.code

    def finish_module(self, module: str) -> None:
        loaded = self._modules.get(module)
        if loaded is None:
            return
        loaded.state = ModuleState.DONE
        if module in self._executing:
            self._executing.remove(module)

    def interpreter_hook(self, target: str, requesting_file: str) -> Optional[AstNode]:
        """Same contract as load_for_vm for the reference interpreter, which runs transformed trees."""
        loaded = self.load(self.resolve(target, requesting_file))
        if loaded.ast is None:
            raise LoadError(f"{loaded.path} has no source tree", self._executing + [loaded.path])
        if loaded.state == ModuleState.EXECUTING:
            raise LoadError(f"load cycle through {loaded.path}", self._executing + [loaded.path])
        if loaded.state == ModuleState.DONE:
            return None
        loaded.state = ModuleState.DONE
        return loaded.ast

    def preload(self, paths: list[str | Path]) -> None:
        for path in paths:
            self.load(path)
