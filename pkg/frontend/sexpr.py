"""
Stable s-expression rendering of the AST, used by `decov dump-ast` and golden tests.
"""
from .ast_nodes import AstNode, NodeKind


def _expr(node: AstNode) -> str:
    kind = node.kind
    if kind == NodeKind.CONST:
        return f"(Const {node.value!r})"
    if kind == NodeKind.NAME:
        return f"(Name {node.value})"
    if kind == NodeKind.CALL:
        return "(Call " + " ".join(_expr(c) for c in node.children) + ")"
    if kind == NodeKind.TUPLE:
        return "(Tuple" + "".join(" " + _expr(c) for c in node.children) + ")"
    return f"({kind.value} {node.value} " + " ".join(_expr(c) for c in node.children) + ")"


def _head(node: AstNode) -> str:
    return f"{node.kind.value}@{node.line}{'*' if node.synthetic else ''}"


def _block(tag: str, stmts: list[AstNode], indent: int) -> list[str]:
    pad = "  " * indent
    if not stmts:
        return [f"{pad}({tag})"]
    lines = [f"{pad}({tag}"]
    for stmt in stmts:
        lines.extend(_stmt(stmt, indent + 1))
    lines[-1] += ")"
    return lines


def _stmt(node: AstNode, indent: int) -> list[str]:
    pad = "  " * indent
    kind = node.kind
    head = _head(node)
    if kind == NodeKind.ASSIGN:
        return [f"{pad}({head} {node.value} {_expr(node.children[0])})"]
    if kind == NodeKind.EXPR_STMT:
        return [f"{pad}({head} {_expr(node.children[0])})"]
    if kind == NodeKind.RETURN:
        value = " " + _expr(node.children[0]) if node.children else ""
        return [f"{pad}({head}{value})"]
    if kind == NodeKind.BRANCH_MARKER:
        origin, dest = node.value
        return [f"{pad}({head} {origin} {dest})"]
    if kind in (NodeKind.RAISE, NodeKind.PASS):
        return [f"{pad}({head})"]

    if kind == NodeKind.IF:
        lines = [f"{pad}({head} {_expr(node.children[0])}"]
        lines += _block("then", node.body, indent + 1)
        lines += _block("else", node.orelse or [], indent + 1)
    elif kind == NodeKind.WHILE:
        lines = [f"{pad}({head} {_expr(node.children[0])}"]
        lines += _block("body", node.body, indent + 1)
        lines += _block("else", node.orelse or [], indent + 1)
    elif kind == NodeKind.FOR_RANGE:
        lines = [f"{pad}({head} {node.value} {_expr(node.children[0])}"]
        lines += _block("body", node.body, indent + 1)
        lines += _block("else", node.orelse or [], indent + 1)
    elif kind == NodeKind.MATCH:
        lines = [f"{pad}({head} {_expr(node.children[0])}"]
        for case in node.body:
            pattern = "_" if case.is_wildcard else repr(case.children[0].value)
            lines += _block(f"{_head(case)} {pattern}", case.body, indent + 1)
    elif kind == NodeKind.FUNCTION_DEF:
        name, params = node.value
        lines = [f"{pad}({head} {name} (params{''.join(' ' + p for p in params)})"]
        lines += _block("body", node.body, indent + 1)
    elif kind == NodeKind.TRY:
        lines = [f"{pad}({head}"]
        lines += _block("body", node.body, indent + 1)
        handler = node.orelse[0]
        lines += _block(_head(handler), handler.body, indent + 1)
    else:
        raise ValueError(f"not a statement: {kind}")
    lines[-1] += ")"
    return lines


def dump_ast(ast: AstNode) -> str:
    """Render a Module (or any statement) as indented s-expressions."""
    if ast.kind == NodeKind.MODULE:
        return "\n".join(_block("Module", ast.body, 0))
    return "\n".join(_stmt(ast, 0))
