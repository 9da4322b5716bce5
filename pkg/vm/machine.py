"""
The decov virtual machine.

A non-recursive frame loop over the pre-decoded program of each CodeObject.
Every frame keeps the CodeObject it started with; calls look the callee up
in the function registry at call time.
"""
import io
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, TextIO

from models.data_models import TraceConfig
from models.errors import MiniRuntimeError, VMFault

from compiler.code_object import CodeObject
from compiler.isa import UNIT, Op
from frontend.semantics import (
    BINARY_FUNCS,
    BINARY_OPERATORS,
    COMPARE_FUNCS,
    COMPARE_OPERATORS,
    HOST_ERRORS,
    format_value,
    literal_matches,
    range_count,
)
from utils.log import get_logger

from .registry import FunctionRegistry, FunctionValue
from .tracing import make_tracer

logger = get_logger("VM")

EXIT_OK = 0
EXIT_EXCEPTION = 1
EXIT_FAULT = 2


class ProbeSink(Protocol):
    def fire(self, probe_id: int) -> None: ...


class NullProbeSink:
    def fire(self, probe_id: int) -> None:
        return None


class ModuleLoaderHook(Protocol):
    def load_for_vm(self, target: str, requesting_source: str) -> Optional[tuple[CodeObject, str]]: ...

    def finish_module(self, module: str) -> None: ...


class _LoadBuiltin:
    def __repr__(self) -> str:
        return "<builtin load>"


LOAD_BUILTIN = _LoadBuiltin()
_MISSING = object()
_DONE = object()

# Skip-exactness hook: (code, header unit, unit the jump landed on)
SkipHook = Callable[[CodeObject, int, int], None]


def _ints(*ops: Op) -> tuple[int, ...]:
    return tuple(int(op) for op in ops)


@dataclass(eq=False)
class Frame:
    code: CodeObject
    locals: Optional[dict]
    path: tuple
    module: str
    is_module: bool = False
    pc: int = 0                     # code units
    stack: list = field(default_factory=list)
    last_line: Optional[int] = None

    @property
    def offset(self) -> int:
        return self.pc * UNIT


@dataclass
class ExecutionResult:
    status: int
    environment: dict
    output: str = ""
    error: Optional[str] = None
    traceback: list = field(default_factory=list)
    return_value: object = None


class VirtualMachine:
    def __init__(
        self,
        registry: Optional[FunctionRegistry] = None,
        probe_sink: Optional[ProbeSink] = None,
        trace: Optional[TraceConfig] = None,
        max_frames: int = 1000,
        loader: Optional[ModuleLoaderHook] = None,
        stdout: Optional[TextIO] = None,
        on_skip: Optional[SkipHook] = None,
    ):
        self.registry = registry or FunctionRegistry()
        self.probe_sink = probe_sink or NullProbeSink()
        self.max_frames = max_frames
        self.loader = loader
        self._buffer = io.StringIO() if stdout is None else None
        self.stdout = stdout if stdout is not None else self._buffer
        self.on_skip = on_skip
        self.globals: dict = {}
        self._current_source = ""
        self.tracer = None
        self.set_trace(trace)

    def set_trace(self, config: Optional[TraceConfig]) -> None:
        """
        Install the tracer for `config`. Called during a run (from a probe sink,
        a loader hook or the tracer itself), the switch takes effect at the next
        line boundary of the running frame.
        """
        self.tracer = make_tracer(config)

    # -- entry points --------------------------------------------------

    def run(self, root: CodeObject, module: Optional[str] = None) -> ExecutionResult:
        module = module or root.source
        frame = Frame(root, None, (), module, is_module=True)
        try:
            value = self._execute(frame)
        except MiniRuntimeError as exc:
            return ExecutionResult(EXIT_EXCEPTION, self.globals, self._output(), exc.message, exc.traceback)
        except VMFault as exc:
            logger.error("%s", exc)
            return ExecutionResult(EXIT_FAULT, self.globals, self._output(), str(exc))
        return ExecutionResult(EXIT_OK, self.globals, self._output(), return_value=value)

    def _output(self) -> str:
        return self._buffer.getvalue() if self._buffer is not None else ""

    # -- calls ---------------------------------------------------------

    def _call_frame(self, callee, args: list, depth: int) -> Optional[Frame]:
        """Frame to push for a call, or None when the call completed without one."""
        if callee is LOAD_BUILTIN:
            return self._load_frame(args[0], depth)
        if not isinstance(callee, FunctionValue):
            raise MiniRuntimeError(f"{format_value(callee)} is not callable")
        entry = self.registry.entries[callee.registry_id]
        code = entry.code
        if len(args) != len(code.argnames):
            raise MiniRuntimeError(f"{callee.name}() takes {len(code.argnames)} arguments ({len(args)} given)")
        if depth + 1 > self.max_frames:
            raise MiniRuntimeError("maximum call depth exceeded")
        return Frame(code, dict(zip(code.argnames, args)), entry.path, entry.module)

    def _load_frame(self, target, depth: int) -> Optional[Frame]:
        if not isinstance(target, str):
            raise MiniRuntimeError("load() needs a path string")
        if self.loader is None:
            raise MiniRuntimeError("load() is not available")
        requesting = self._current_source
        loaded = self.loader.load_for_vm(target, requesting)
        if loaded is None:
            return None
        code, module = loaded
        if depth + 1 > self.max_frames:
            self.loader.finish_module(module)
            raise MiniRuntimeError("maximum call depth exceeded")
        return Frame(code, None, (), module, is_module=True)

    # -- the loop ------------------------------------------------------

    def _execute(self, root: Frame):
        NOP, LOAD_CONST, LOAD_NAME, STORE_NAME, POP_TOP = _ints(Op.NOP, Op.LOAD_CONST, Op.LOAD_NAME, Op.STORE_NAME, Op.POP_TOP)
        UNARY_NEG, UNARY_NOT, BINARY_OP, COMPARE_OP = _ints(Op.UNARY_NEG, Op.UNARY_NOT, Op.BINARY_OP, Op.COMPARE_OP)
        BUILD_TUPLE, JUMP_FORWARD, JUMP_BACKWARD, POP_JUMP_IF_FALSE = _ints(
            Op.BUILD_TUPLE, Op.JUMP_FORWARD, Op.JUMP_BACKWARD, Op.POP_JUMP_IF_FALSE
        )
        CALL, MAKE_FUNCTION, RETURN_VALUE, RETURN_CONST, RAISE = _ints(
            Op.CALL, Op.MAKE_FUNCTION, Op.RETURN_VALUE, Op.RETURN_CONST, Op.RAISE
        )
        PROBE, PRINT, GET_RANGE_ITER, FOR_RANGE_NEXT, MATCH_LITERAL = _ints(
            Op.PROBE, Op.PRINT, Op.GET_RANGE_ITER, Op.FOR_RANGE_NEXT, Op.MATCH_LITERAL
        )

        globals_ = self.globals
        registry = self.registry
        fire = self.probe_sink.fire
        write = self.stdout.write
        on_skip = self.on_skip

        frames = [root]
        frame = root

        while True:
            # (re)load the frame-local view
            program = frame.code.program
            ops = program.ops
            lines = program.lines
            stack = frame.stack
            push = stack.append
            pop = stack.pop
            local_env = frame.locals
            store_env = globals_ if local_env is None else local_env
            pc = frame.pc
            tracer = self.tracer
            last_line = frame.last_line
            backward = False
            self._current_source = frame.code.source

            try:
                while True:
                    if tracer is not None:
                        line = lines[pc]
                        if line and (line != last_line or backward):
                            tracer(frame.code.source, last_line, line)
                            last_line = line
                            tracer = self.tracer
                        backward = False

                    op, arg, nxt = ops[pc]

                    if op == LOAD_NAME:
                        value = _MISSING if local_env is None else local_env.get(arg, _MISSING)
                        if value is _MISSING:
                            value = globals_.get(arg, _MISSING)
                            if value is _MISSING:
                                if arg != "load":
                                    raise MiniRuntimeError(f"name '{arg}' is not defined")
                                value = LOAD_BUILTIN
                        push(value)
                        pc = nxt
                    elif op == LOAD_CONST:
                        push(arg)
                        pc = nxt
                    elif op == STORE_NAME:
                        store_env[arg] = pop()
                        pc = nxt
                    elif op == JUMP_FORWARD:
                        if on_skip is not None and pc in program.probe_skips:
                            on_skip(frame.code, pc, arg)
                        pc = arg
                    elif op == BINARY_OP:
                        right = pop()
                        try:
                            stack[-1] = BINARY_FUNCS[arg](stack[-1], right)
                        except HOST_ERRORS as exc:
                            raise MiniRuntimeError(f"{BINARY_OPERATORS[arg]}: {exc}") from None
                        pc = nxt
                    elif op == COMPARE_OP:
                        right = pop()
                        try:
                            stack[-1] = bool(COMPARE_FUNCS[arg](stack[-1], right))
                        except HOST_ERRORS as exc:
                            raise MiniRuntimeError(f"{COMPARE_OPERATORS[arg]}: {exc}") from None
                        pc = nxt
                    elif op == POP_JUMP_IF_FALSE:
                        pc = nxt if pop() else arg
                    elif op == JUMP_BACKWARD:
                        backward = True
                        pc = arg
                    elif op == PROBE:
                        fire(arg)
                        tracer = self.tracer
                        pc = nxt
                    elif op == FOR_RANGE_NEXT:
                        value = next(stack[-1], _DONE)
                        if value is _DONE:
                            pop()
                            pc = arg
                        else:
                            push(value)
                            pc = nxt
                    elif op == NOP:
                        pc = nxt
                    elif op == POP_TOP:
                        pop()
                        pc = nxt
                    elif op == CALL:
                        if arg:
                            args = stack[-arg:]
                            del stack[-arg:]
                        else:
                            args = []
                        callee = pop()
                        frame.pc = pc
                        frame.last_line = last_line
                        new_frame = self._call_frame(callee, args, len(frames))
                        if new_frame is None:
                            push(None)
                            tracer = self.tracer
                            pc = nxt
                            continue
                        frames.append(new_frame)
                        frame = new_frame
                        break
                    elif op == RETURN_VALUE or op == RETURN_CONST:
                        value = pop() if op == RETURN_VALUE else arg
                        frames.pop()
                        if frame.is_module and self.loader is not None and frame is not root:
                            self.loader.finish_module(frame.module)
                        if not frames:
                            return value
                        frame = frames[-1]
                        frame.stack.append(value)
                        frame.pc = frame.code.program.ops[frame.pc][2]
                        break
                    elif op == MATCH_LITERAL:
                        push(literal_matches(stack[-1], arg))
                        pc = nxt
                    elif op == UNARY_NOT:
                        stack[-1] = not stack[-1]
                        pc = nxt
                    elif op == UNARY_NEG:
                        try:
                            stack[-1] = -stack[-1]
                        except HOST_ERRORS as exc:
                            raise MiniRuntimeError(f"unary -: {exc}") from None
                        pc = nxt
                    elif op == BUILD_TUPLE:
                        if arg:
                            items = tuple(stack[-arg:])
                            del stack[-arg:]
                        else:
                            items = ()
                        push(items)
                        pc = nxt
                    elif op == PRINT:
                        write(format_value(stack[-1]) + "\n")
                        stack[-1] = None
                        pc = nxt
                    elif op == GET_RANGE_ITER:
                        stack[-1] = iter(range(range_count(stack[-1])))
                        pc = nxt
                    elif op == MAKE_FUNCTION:
                        push(registry.define(frame.module, frame.path + (arg,), frame.code.consts[arg]))
                        pc = nxt
                    elif op == RAISE:
                        raise MiniRuntimeError("raise")
                    else:
                        raise VMFault(f"unknown opcode {op}", pc * UNIT)

            except MiniRuntimeError as exc:
                frame.pc = pc
                frame.last_line = last_line
                frame = self._unwind(frames, exc)
            except (IndexError, TypeError) as exc:
                raise VMFault(f"{frame.code.name}: {exc}", pc * UNIT) from exc

    def _unwind(self, frames: list[Frame], exc: MiniRuntimeError) -> Frame:
        """Find the innermost handler for `exc`, popping frames without one."""
        while frames:
            frame = frames[-1]
            for start, end, handler, depth in frame.code.program.handlers:
                if start <= frame.pc < end:
                    del frame.stack[depth:]
                    frame.pc = handler
                    return frame
            exc.traceback.append((frame.code.source, frame.code.name, frame.code.program.lines[frame.pc]))
            frames.pop()
            if frame.is_module and self.loader is not None and frames:
                self.loader.finish_module(frame.module)
        raise exc
