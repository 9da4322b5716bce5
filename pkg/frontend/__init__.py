from .ast_nodes import AstNode, NodeKind, SourcePosition, BRANCHING_KINDS, STATEMENT_KINDS, make_marker, make_pass
from .parser import parse, RESERVED_NAME, MAX_NESTING
from .universe import CoverableUniverse, enumerate_universe
from .sexpr import dump_ast
from .interpreter import interpret, InterpResult

__all__ = [
    "AstNode",
    "NodeKind",
    "SourcePosition",
    "BRANCHING_KINDS",
    "STATEMENT_KINDS",
    "make_marker",
    "make_pass",
    "parse",
    "RESERVED_NAME",
    "MAX_NESTING",
    "CoverableUniverse",
    "enumerate_universe",
    "dump_ast",
    "interpret",
    "InterpResult",
]
