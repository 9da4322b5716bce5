"""
Reference tree-walking interpreter.

This is the semantic oracle for the compiled pipeline: it runs the AST
directly, and when the tree has been through the branch transform it records
every BranchMarker it executes.
"""
import io
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

from models.errors import MiniRuntimeError

from .ast_nodes import AstNode, NodeKind
from .semantics import (
    BINARY_OPERATORS,
    COMPARE_OPERATORS,
    binary_op,
    compare_op,
    format_value,
    literal_matches,
    negate,
    range_count,
    truthy,
)


class InterpFunction:
    def __init__(self, name: str, params: tuple[str, ...], body: list[AstNode], file: str):
        self.name = name
        self.params = params
        self.body = body
        self.file = file

    def __repr__(self) -> str:
        return f"<function {self.name}>"


@dataclass
class InterpResult:
    status: int
    environment: dict
    output: str
    branches: set[tuple[str, int, int]] = field(default_factory=set)
    error: Optional[str] = None


class _Return(Exception):
    def __init__(self, value):
        self.value = value


# Host stack frames one Mini call may need when its body nests statements and expressions.
HOST_FRAMES_PER_CALL = 60

# load(path, requesting_file) -> Module AST to execute, or None when already executed
LoadHook = Callable[[str, str], Optional[AstNode]]


class Interpreter:
    def __init__(self, max_frames: int = 1000, load_hook: Optional[LoadHook] = None):
        self.max_frames = max_frames
        self.load_hook = load_hook
        self.globals: dict = {}
        self.out = io.StringIO()
        self.branches: set[tuple[str, int, int]] = set()
        self._depth = 0

    def run(self, module: AstNode) -> InterpResult:
        previous = sys.getrecursionlimit()
        sys.setrecursionlimit(max(previous, (self.max_frames + 1) * HOST_FRAMES_PER_CALL))
        try:
            self._exec_block(module.body, None, module.pos.file)
        except MiniRuntimeError as exc:
            return InterpResult(1, self.globals, self.out.getvalue(), self.branches, exc.message)
        except RecursionError:
            return InterpResult(1, self.globals, self.out.getvalue(), self.branches, "maximum call depth exceeded")
        finally:
            sys.setrecursionlimit(previous)
        return InterpResult(0, self.globals, self.out.getvalue(), self.branches)

    # -- statements ----------------------------------------------------

    def _store(self, name: str, value, local: Optional[dict]) -> None:
        (self.globals if local is None else local)[name] = value

    def _exec_block(self, stmts: list[AstNode], local: Optional[dict], file: str) -> None:
        for stmt in stmts:
            self._exec(stmt, local, file)

    def _exec(self, stmt: AstNode, local: Optional[dict], file: str) -> None:
        kind = stmt.kind
        if kind == NodeKind.ASSIGN:
            self._store(stmt.value, self._eval(stmt.children[0], local, file), local)
        elif kind == NodeKind.EXPR_STMT:
            self._eval(stmt.children[0], local, file)
        elif kind == NodeKind.PASS:
            pass
        elif kind == NodeKind.BRANCH_MARKER:
            origin, dest = stmt.value
            self.branches.add((file, origin, dest))
            self._store("_branch", (origin, dest), local)
        elif kind == NodeKind.IF:
            if truthy(self._eval(stmt.children[0], local, file)):
                self._exec_block(stmt.body, local, file)
            else:
                self._exec_block(stmt.orelse or [], local, file)
        elif kind == NodeKind.WHILE:
            while truthy(self._eval(stmt.children[0], local, file)):
                self._exec_block(stmt.body, local, file)
            self._exec_block(stmt.orelse or [], local, file)
        elif kind == NodeKind.FOR_RANGE:
            count = range_count(self._eval(stmt.children[0], local, file))
            for i in range(count):
                self._store(stmt.value, i, local)
                self._exec_block(stmt.body, local, file)
            self._exec_block(stmt.orelse or [], local, file)
        elif kind == NodeKind.MATCH:
            subject = self._eval(stmt.children[0], local, file)
            for case in stmt.body:
                if case.is_wildcard or literal_matches(subject, case.children[0].value):
                    self._exec_block(case.body, local, file)
                    break
        elif kind == NodeKind.FUNCTION_DEF:
            name, params = stmt.value
            self._store(name, InterpFunction(name, params, stmt.body, file), local)
        elif kind == NodeKind.RETURN:
            value = self._eval(stmt.children[0], local, file) if stmt.children else None
            raise _Return(value)
        elif kind == NodeKind.RAISE:
            raise MiniRuntimeError("raise")
        elif kind == NodeKind.TRY:
            try:
                self._exec_block(stmt.body, local, file)
            except MiniRuntimeError:
                self._exec_block(stmt.orelse[0].body, local, file)
        else:
            raise ValueError(f"cannot execute {kind}")

    # -- expressions ---------------------------------------------------

    def _lookup(self, name: str, local: Optional[dict]):
        if local is not None and name in local:
            return local[name]
        if name in self.globals:
            return self.globals[name]
        raise MiniRuntimeError(f"name '{name}' is not defined")

    def _eval(self, node: AstNode, local: Optional[dict], file: str):
        kind = node.kind
        if kind == NodeKind.CONST:
            return node.value
        if kind == NodeKind.NAME:
            return self._lookup(node.value, local)
        if kind == NodeKind.BINARY:
            left = self._eval(node.children[0], local, file)
            right = self._eval(node.children[1], local, file)
            return binary_op(BINARY_OPERATORS.index(node.value), left, right)
        if kind == NodeKind.COMPARE:
            left = self._eval(node.children[0], local, file)
            right = self._eval(node.children[1], local, file)
            return compare_op(COMPARE_OPERATORS.index(node.value), left, right)
        if kind == NodeKind.UNARY:
            operand = self._eval(node.children[0], local, file)
            return negate(operand) if node.value == "-" else not truthy(operand)
        if kind == NodeKind.BOOL_OP:
            left = truthy(self._eval(node.children[0], local, file))
            if node.value == "and":
                return self._eval(node.children[1], local, file) if left else False
            return True if left else self._eval(node.children[1], local, file)
        if kind == NodeKind.TUPLE:
            return tuple(self._eval(c, local, file) for c in node.children)
        if kind == NodeKind.CALL:
            return self._call(node, local, file)
        raise ValueError(f"cannot evaluate {kind}")

    def _call(self, node: AstNode, local: Optional[dict], file: str):
        callee_node = node.children[0]
        if callee_node.kind == NodeKind.NAME and callee_node.value == "print":
            value = self._eval(node.children[1], local, file)
            self.out.write(format_value(value) + "\n")
            return None
        if callee_node.kind == NodeKind.NAME and callee_node.value == "load":
            target = self._eval(node.children[1], local, file)
            return self._load(target, file)
        callee = self._eval(callee_node, local, file)
        args = [self._eval(a, local, file) for a in node.children[1:]]
        if not isinstance(callee, InterpFunction):
            raise MiniRuntimeError(f"{format_value(callee)} is not callable")
        if len(args) != len(callee.params):
            raise MiniRuntimeError(
                f"{callee.name}() takes {len(callee.params)} arguments ({len(args)} given)"
            )
        self._check_depth()
        frame = dict(zip(callee.params, args))
        self._depth += 1
        try:
            self._exec_block(callee.body, frame, callee.file)
        except _Return as ret:
            return ret.value
        finally:
            self._depth -= 1
        return None

    def _check_depth(self) -> None:
        # Frames in use are the root plus one per active call or load.
        if self._depth + 2 > self.max_frames:
            raise MiniRuntimeError("maximum call depth exceeded")

    def _load(self, target, file: str):
        if not isinstance(target, str):
            raise MiniRuntimeError("load() needs a path string")
        if self.load_hook is None:
            raise MiniRuntimeError("load() is not available")
        module = self.load_hook(target, file)
        if module is not None:
            self._check_depth()
            self._depth += 1
            try:
                self._exec_block(module.body, None, module.pos.file)
            finally:
                self._depth -= 1
        return None


def interpret(ast: AstNode, max_frames: int = 1000, load_hook: Optional[LoadHook] = None) -> InterpResult:
    """Run a Module tree and report status, globals, stdout and executed markers."""
    return Interpreter(max_frames=max_frames, load_hook=load_hook).run(ast)
