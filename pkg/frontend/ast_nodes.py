"""
Syntax tree for Mini programs.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional


class NodeKind(str, Enum):
    MODULE = "Module"
    FUNCTION_DEF = "FunctionDef"
    IF = "If"
    WHILE = "While"
    FOR_RANGE = "ForRange"
    MATCH = "Match"
    CASE = "Case"
    TRY = "Try"
    EXCEPT = "Except"
    ASSIGN = "Assign"
    EXPR_STMT = "ExprStmt"
    RETURN = "Return"
    RAISE = "Raise"
    PASS = "Pass"
    BRANCH_MARKER = "BranchMarker"
    CONST = "Const"
    NAME = "Name"
    UNARY = "Unary"
    BINARY = "Binary"
    COMPARE = "Compare"
    BOOL_OP = "BoolOp"
    CALL = "Call"
    TUPLE = "Tuple"


STATEMENT_KINDS = frozenset({
    NodeKind.FUNCTION_DEF,
    NodeKind.IF,
    NodeKind.WHILE,
    NodeKind.FOR_RANGE,
    NodeKind.MATCH,
    NodeKind.TRY,
    NodeKind.ASSIGN,
    NodeKind.EXPR_STMT,
    NodeKind.RETURN,
    NodeKind.RAISE,
    NodeKind.PASS,
    NodeKind.BRANCH_MARKER,
})

BRANCHING_KINDS = frozenset({NodeKind.IF, NodeKind.WHILE, NodeKind.FOR_RANGE, NodeKind.MATCH})


@dataclass(frozen=True)
class SourcePosition:
    file: str
    line: int

    def __post_init__(self):
        if self.line < 1:
            raise ValueError(f"line must be >= 1, got {self.line}")
        if not self.file:
            raise ValueError("file must be non-empty")


@dataclass
class AstNode:
    """
    One node of the tree.

    `value` carries the node's scalar payload: the literal of a Const,
    the identifier of a Name/Assign/ForRange target, the operator of
    Unary/Binary/Compare/BoolOp, the (name, parameter names) pair of a
    FunctionDef, and the (origin, dest) pair of a BranchMarker.

    `children` holds sub-expressions (test, operands, call arguments); a Case keeps
    its literal as a single Const child and has none when it is the `case _` arm.
    `body` and `orelse` are statement blocks; `orelse` is None when the construct
    has no else slot at all (statements other than If/While/ForRange). Match keeps
    its Case nodes in `body`, Try keeps its Except clause in `orelse`.
    """
    kind: NodeKind
    pos: SourcePosition
    value: Any = None
    children: list["AstNode"] = field(default_factory=list)
    body: list["AstNode"] = field(default_factory=list)
    orelse: Optional[list["AstNode"]] = None
    synthetic: bool = False

    @property
    def line(self) -> int:
        return self.pos.line

    @property
    def is_statement(self) -> bool:
        return self.kind in STATEMENT_KINDS

    @property
    def is_wildcard(self) -> bool:
        return self.kind == NodeKind.CASE and not self.children

    def arms(self) -> list[list["AstNode"]]:
        """Statement blocks that form the arms of a branching construct."""
        if self.kind == NodeKind.MATCH:
            return [case.body for case in self.body]
        if self.kind in BRANCHING_KINDS:
            return [self.body, self.orelse or []]
        return []

    def walk(self):
        """Pre-order traversal over every node of the subtree."""
        yield self
        for child in self.children:
            yield from child.walk()
        for stmt in self.body:
            yield from stmt.walk()
        for stmt in self.orelse or ():
            yield from stmt.walk()


def make_marker(origin: int, dest: int, file: str) -> AstNode:
    return AstNode(
        kind=NodeKind.BRANCH_MARKER,
        pos=SourcePosition(file, origin),
        value=(origin, dest),
        synthetic=True,
    )


def make_pass(line: int, file: str, synthetic: bool = True) -> AstNode:
    return AstNode(kind=NodeKind.PASS, pos=SourcePosition(file, line), synthetic=synthetic)
