"""
AST to CodeObject compiler.

Line attribution: every statement announces its line before its first
instruction. A line that produced no instruction of its own (`pass`, `try`)
is materialized as a NOP when the next line is announced or a jump label is
bound, so every statement line owns at least one instruction.

Jumps that only stitch blocks together (loop back-edges, the jump over an
else arm, the implicit return) belong to no source line: their line table
entry carries NO_LINE, and tracing never reports them.
"""
from typing import Optional

from models.errors import CompileError

from frontend.ast_nodes import AstNode, NodeKind
from frontend.semantics import BINARY_OPERATORS, COMPARE_OPERATORS

from .assembly import Instr, assemble
from .code_object import CodeObject
from .isa import Op

MAX_CONSTS = (1 << 26) - 1
MODULE_NAME = "<module>"
RETVAL_NAME = ".retval"
NO_LINE = 0


class _Label:
    __slots__ = ("instr",)

    def __init__(self):
        self.instr: Optional[Instr] = None


class _CodeBuilder:
    def __init__(self, name: str, source: str, argnames: tuple[str, ...], first_line: int):
        self.name = name
        self.source = source
        self.argnames = argnames
        self.first_line = first_line
        self.instrs: list[Instr] = []
        self.consts: list = []
        self._const_index: dict = {}
        self.names: list[str] = []
        self._name_index: dict[str, int] = {}
        self.line_entries: list[tuple[Instr, int]] = []
        self.exc_entries: list[tuple[_Label, _Label, _Label]] = []
        self._jumps: list[tuple[Instr, _Label]] = []
        self._waiting: list[_Label] = []
        self._pending_line: Optional[int] = None
        self._last_line: Optional[int] = None
        self.loop_depth = 0

    # -- emission ------------------------------------------------------

    def emit(self, op: Op, arg: int = 0, target: Optional[_Label] = None) -> Instr:
        instr = Instr(op, arg)
        if target is not None:
            self._jumps.append((instr, target))
        for label in self._waiting:
            label.instr = instr
        self._waiting.clear()
        if self._pending_line is not None:
            self.line_entries.append((instr, self._pending_line))
            self._last_line = self._pending_line
            self._pending_line = None
        self.instrs.append(instr)
        return instr

    def set_line(self, line: int) -> None:
        if self._pending_line is not None:
            if self._pending_line == line:
                return
            self.emit(Op.NOP)
        if line != self._last_line:
            self._pending_line = line

    def flush_line(self) -> None:
        if self._pending_line is not None:
            self.emit(Op.NOP)

    def set_artificial(self) -> None:
        self.flush_line()
        if self._last_line != NO_LINE:
            self._pending_line = NO_LINE

    def bind(self, label: _Label) -> None:
        self.flush_line()
        self._waiting.append(label)

    def const(self, value) -> int:
        if isinstance(value, CodeObject):
            key = ("code", len(self.consts))
        else:
            key = (type(value), value)
            if key in self._const_index:
                return self._const_index[key]
        if len(self.consts) >= MAX_CONSTS:
            raise CompileError(f"{self.name}: more than {MAX_CONSTS} constants")
        self._const_index[key] = len(self.consts)
        self.consts.append(value)
        return len(self.consts) - 1

    def name_index(self, name: str) -> int:
        if name not in self._name_index:
            self._name_index[name] = len(self.names)
            self.names.append(name)
        return self._name_index[name]

    # -- finishing -----------------------------------------------------

    def finish(self) -> CodeObject:
        self.set_artificial()
        self.emit(Op.RETURN_CONST, self.const(None))
        for instr, label in self._jumps:
            instr.target = label.instr
        assembled = assemble(self.instrs)

        line_table: list[tuple[int, int]] = []
        for instr, line in self.line_entries:
            offset = assembled.offset_of(instr)
            if line_table and line_table[-1][0] == offset:
                line_table[-1] = (offset, line)
            else:
                line_table.append((offset, line))

        exc_table = []
        for start, end, handler in self.exc_entries:
            s, e = assembled.offset_of(start.instr), assembled.offset_of(end.instr)
            if s < e:
                exc_table.append((s, e, assembled.offset_of(handler.instr)))

        return CodeObject(
            name=self.name,
            source=self.source,
            code=assembled.code,
            consts=tuple(self.consts),
            names=tuple(self.names),
            argnames=self.argnames,
            line_table=tuple(line_table),
            exc_table=tuple(exc_table),
            first_line=self.first_line,
        )


class Compiler:
    """Compiles one Module or FunctionDef tree; nested defs become const code objects."""

    def __init__(self, source: str):
        self.source = source

    def compile_module(self, module: AstNode) -> CodeObject:
        builder = _CodeBuilder(MODULE_NAME, self.source, (), module.line)
        self._block(builder, module.body)
        return builder.finish()

    def compile_function(self, node: AstNode) -> CodeObject:
        name, params = node.value
        builder = _CodeBuilder(name, self.source, tuple(params), node.line)
        self._block(builder, node.body)
        return builder.finish()

    # -- statements ----------------------------------------------------

    def _block(self, b: _CodeBuilder, stmts: list[AstNode]) -> None:
        for stmt in stmts:
            self._stmt(b, stmt)

    def _stmt(self, b: _CodeBuilder, stmt: AstNode) -> None:
        kind = stmt.kind
        if kind == NodeKind.BRANCH_MARKER:
            b.set_line(stmt.line)
            b.emit(Op.LOAD_CONST, b.const(tuple(stmt.value)))
            b.emit(Op.STORE_NAME, b.name_index("_branch"))
            return

        if kind != NodeKind.WHILE:
            # A while loop announces its line at the loop head.
            b.set_line(stmt.line)
        if kind == NodeKind.ASSIGN:
            self._expr(b, stmt.children[0])
            b.emit(Op.STORE_NAME, b.name_index(stmt.value))
        elif kind == NodeKind.EXPR_STMT:
            self._expr(b, stmt.children[0])
            b.emit(Op.POP_TOP)
        elif kind == NodeKind.PASS:
            pass
        elif kind == NodeKind.RAISE:
            b.emit(Op.RAISE)
        elif kind == NodeKind.RETURN:
            self._return(b, stmt)
        elif kind == NodeKind.FUNCTION_DEF:
            child = self.compile_function(stmt)
            b.emit(Op.MAKE_FUNCTION, b.const(child))
            b.emit(Op.STORE_NAME, b.name_index(stmt.value[0]))
        elif kind == NodeKind.IF:
            self._if(b, stmt)
        elif kind == NodeKind.WHILE:
            self._while(b, stmt)
        elif kind == NodeKind.FOR_RANGE:
            self._for(b, stmt)
        elif kind == NodeKind.MATCH:
            self._match(b, stmt)
        elif kind == NodeKind.TRY:
            self._try(b, stmt)
        else:
            raise CompileError(f"cannot compile {kind.value} at line {stmt.line}")

    def _return(self, b: _CodeBuilder, stmt: AstNode) -> None:
        if b.loop_depth == 0:
            if stmt.children:
                self._expr(b, stmt.children[0])
                b.emit(Op.RETURN_VALUE)
            else:
                b.emit(Op.RETURN_CONST, b.const(None))
            return
        # Range iterators of the enclosing loops are still on the stack.
        if stmt.children:
            self._expr(b, stmt.children[0])
        else:
            b.emit(Op.LOAD_CONST, b.const(None))
        b.emit(Op.STORE_NAME, b.name_index(RETVAL_NAME))
        for _ in range(b.loop_depth):
            b.emit(Op.POP_TOP)
        b.emit(Op.LOAD_NAME, b.name_index(RETVAL_NAME))
        b.emit(Op.RETURN_VALUE)

    def _if(self, b: _CodeBuilder, stmt: AstNode) -> None:
        self._expr(b, stmt.children[0])
        end = _Label()
        if stmt.orelse:
            orelse = _Label()
            b.emit(Op.POP_JUMP_IF_FALSE, target=orelse)
            self._block(b, stmt.body)
            b.set_artificial()
            b.emit(Op.JUMP_FORWARD, target=end)
            b.bind(orelse)
            self._block(b, stmt.orelse)
        else:
            b.emit(Op.POP_JUMP_IF_FALSE, target=end)
            self._block(b, stmt.body)
        b.bind(end)

    def _while(self, b: _CodeBuilder, stmt: AstNode) -> None:
        head, orelse = _Label(), _Label()
        b.bind(head)
        b.set_line(stmt.line)
        self._expr(b, stmt.children[0])
        b.emit(Op.POP_JUMP_IF_FALSE, target=orelse)
        self._block(b, stmt.body)
        b.set_artificial()
        b.emit(Op.JUMP_BACKWARD, target=head)
        b.bind(orelse)
        self._block(b, stmt.orelse or [])

    def _for(self, b: _CodeBuilder, stmt: AstNode) -> None:
        head, exhausted = _Label(), _Label()
        self._expr(b, stmt.children[0])
        b.emit(Op.GET_RANGE_ITER)
        b.bind(head)
        b.emit(Op.FOR_RANGE_NEXT, target=exhausted)
        b.emit(Op.STORE_NAME, b.name_index(stmt.value))
        b.loop_depth += 1
        self._block(b, stmt.body)
        b.set_artificial()
        b.emit(Op.JUMP_BACKWARD, target=head)
        b.loop_depth -= 1
        b.bind(exhausted)
        self._block(b, stmt.orelse or [])

    def _match(self, b: _CodeBuilder, stmt: AstNode) -> None:
        self._expr(b, stmt.children[0])
        end = _Label()
        cases = stmt.body
        for index, case in enumerate(cases):
            last = index == len(cases) - 1
            b.set_line(stmt.line)
            if case.is_wildcard:
                b.emit(Op.POP_TOP)
                self._block(b, case.body)
                if not last:
                    b.set_artificial()
                    b.emit(Op.JUMP_FORWARD, target=end)
                continue
            nxt = _Label()
            b.emit(Op.MATCH_LITERAL, b.const(case.children[0].value))
            b.emit(Op.POP_JUMP_IF_FALSE, target=nxt)
            b.emit(Op.POP_TOP)
            self._block(b, case.body)
            b.set_artificial()
            b.emit(Op.JUMP_FORWARD, target=end)
            b.bind(nxt)
        if not cases[-1].is_wildcard:
            b.set_line(stmt.line)
            b.emit(Op.POP_TOP)
        b.bind(end)

    def _try(self, b: _CodeBuilder, stmt: AstNode) -> None:
        start, body_end, handler, end = _Label(), _Label(), _Label(), _Label()
        b.bind(start)
        self._block(b, stmt.body)
        b.bind(body_end)
        b.set_artificial()
        b.emit(Op.JUMP_FORWARD, target=end)
        b.bind(handler)
        self._block(b, stmt.orelse[0].body)
        b.bind(end)
        b.exc_entries.append((start, body_end, handler))

    # -- expressions ---------------------------------------------------

    def _expr(self, b: _CodeBuilder, node: AstNode) -> None:
        kind = node.kind
        if kind == NodeKind.CONST:
            b.emit(Op.LOAD_CONST, b.const(node.value))
        elif kind == NodeKind.NAME:
            b.emit(Op.LOAD_NAME, b.name_index(node.value))
        elif kind == NodeKind.BINARY:
            self._expr(b, node.children[0])
            self._expr(b, node.children[1])
            b.emit(Op.BINARY_OP, BINARY_OPERATORS.index(node.value))
        elif kind == NodeKind.COMPARE:
            self._expr(b, node.children[0])
            self._expr(b, node.children[1])
            b.emit(Op.COMPARE_OP, COMPARE_OPERATORS.index(node.value))
        elif kind == NodeKind.UNARY:
            self._expr(b, node.children[0])
            b.emit(Op.UNARY_NEG if node.value == "-" else Op.UNARY_NOT)
        elif kind == NodeKind.BOOL_OP:
            self._bool_op(b, node)
        elif kind == NodeKind.TUPLE:
            for child in node.children:
                self._expr(b, child)
            b.emit(Op.BUILD_TUPLE, len(node.children))
        elif kind == NodeKind.CALL:
            self._call(b, node)
        else:
            raise CompileError(f"cannot compile expression {kind.value} at line {node.line}")

    def _bool_op(self, b: _CodeBuilder, node: AstNode) -> None:
        left, right = node.children
        short, end = _Label(), _Label()
        self._expr(b, left)
        b.emit(Op.POP_JUMP_IF_FALSE, target=short)
        if node.value == "and":
            self._expr(b, right)
            b.emit(Op.JUMP_FORWARD, target=end)
            b.bind(short)
            b.emit(Op.LOAD_CONST, b.const(False))
        else:
            b.emit(Op.LOAD_CONST, b.const(True))
            b.emit(Op.JUMP_FORWARD, target=end)
            b.bind(short)
            self._expr(b, right)
        b.bind(end)

    def _call(self, b: _CodeBuilder, node: AstNode) -> None:
        callee, *args = node.children
        if callee.kind == NodeKind.NAME and callee.value == "print":
            self._expr(b, args[0])
            b.emit(Op.PRINT)
            return
        self._expr(b, callee)
        for arg in args:
            self._expr(b, arg)
        b.emit(Op.CALL, len(args))


def compile_ast(ast: AstNode) -> CodeObject:
    """Compile a Module (or a FunctionDef subtree) into a CodeObject tree."""
    compiler = Compiler(ast.pos.file)
    if ast.kind == NodeKind.MODULE:
        return compiler.compile_module(ast)
    if ast.kind == NodeKind.FUNCTION_DEF:
        return compiler.compile_function(ast)
    raise CompileError(f"cannot compile a bare {ast.kind.value}")
