"""
Branch transform: split critical edges, then demarcate every arm with a
`_branch = (origin, dest)` marker.
"""
import copy
from collections import defaultdict
from typing import Optional

from models.errors import TransformError

from frontend.ast_nodes import AstNode, BRANCHING_KINDS, NodeKind, make_marker, make_pass

# Destination of an arm that leaves the enclosing function or module.
EXIT = 0


def split_critical_edges(ast: AstNode) -> AstNode:
    """Give every If/While/ForRange an else arm and every Match a `case _` arm."""
    tree = copy.deepcopy(ast)
    for node in tree.walk():
        if node.kind in (NodeKind.IF, NodeKind.WHILE, NodeKind.FOR_RANGE):
            if not node.orelse:
                node.orelse = [make_pass(node.line, node.pos.file)]
        elif node.kind == NodeKind.MATCH:
            if not node.body[-1].is_wildcard:
                node.body.append(AstNode(
                    NodeKind.CASE, node.pos,
                    body=[make_pass(node.line, node.pos.file)],
                    synthetic=True,
                ))
    return tree


def _first_real_line(arm: list[AstNode]) -> Optional[int]:
    for stmt in arm:
        if not stmt.synthetic:
            return stmt.line
    return None


class _Demarcator:
    """
    Walks statement blocks carrying the line control reaches after each
    statement ("follow"); None means the block is in tail position of a
    function or module, and arms that run off it go to EXIT.

    Facts are claimed per origin line so no two arms share one: an arm whose
    natural destination is already taken gets the slot -position instead
    (or the next free negative slot).
    """

    def __init__(self, file: str):
        self.file = file
        self.claimed: dict[int, set[int]] = defaultdict(set)

    def block(self, stmts: list[AstNode], follow: Optional[int]) -> None:
        for i, stmt in enumerate(stmts):
            nxt = stmts[i + 1].line if i + 1 < len(stmts) else follow
            self.statement(stmt, nxt)

    def _claim(self, origin: int, dest: int, position: int) -> int:
        taken = self.claimed[origin]
        if dest in taken:
            dest = -position
            while dest in taken:
                dest -= 1
        taken.add(dest)
        return dest

    def _arms(self, origin: int, arms: list[tuple[list[AstNode], int, Optional[int]]]) -> None:
        """`arms` holds (block, where an empty block leads, follow inside the block)."""
        dests = []
        for position, (arm, otherwise, _) in enumerate(arms, start=1):
            first = _first_real_line(arm)
            dests.append(self._claim(origin, otherwise if first is None else first, position))
        for (arm, _, inner_follow), dest in zip(arms, dests):
            self.block(arm, inner_follow)
            arm.insert(0, make_marker(origin, dest, self.file))

    def statement(self, stmt: AstNode, follow: Optional[int]) -> None:
        kind = stmt.kind
        origin = stmt.line
        onward = follow if follow is not None else EXIT
        if kind == NodeKind.IF:
            self._arms(origin, [(stmt.body, onward, follow), (stmt.orelse, onward, follow)])
        elif kind in (NodeKind.WHILE, NodeKind.FOR_RANGE):
            # Control returns to the loop header after the body.
            self._arms(origin, [(stmt.body, origin, origin), (stmt.orelse, onward, follow)])
        elif kind == NodeKind.MATCH:
            self._arms(origin, [(case.body, onward, follow) for case in stmt.body])
        elif kind == NodeKind.FUNCTION_DEF:
            self.block(stmt.body, None)
        elif kind == NodeKind.TRY:
            self.block(stmt.body, follow)
            self.block(stmt.orelse[0].body, follow)


def demarcate_branches(ast: AstNode) -> AstNode:
    """Insert a BranchMarker at the head of every arm; expects split edges."""
    tree = copy.deepcopy(ast)
    check_arm_totality(tree)
    _Demarcator(tree.pos.file).block(tree.body, None)
    return tree


def check_arm_totality(ast: AstNode) -> None:
    """Raise TransformError if any branching construct still has an implicit arm."""
    for node in ast.walk():
        if node.kind in (NodeKind.IF, NodeKind.WHILE, NodeKind.FOR_RANGE) and not node.orelse:
            raise TransformError(f"{node.kind.value} at line {node.line} has no else arm")
        if node.kind == NodeKind.MATCH and not node.body[-1].is_wildcard:
            raise TransformError(f"Match at line {node.line} has no wildcard case")


def transform(ast: AstNode) -> AstNode:
    """Full branch transform: edge splitting followed by demarcation."""
    return demarcate_branches(split_critical_edges(ast))


def count_arms(ast: AstNode) -> int:
    return sum(len(node.arms()) for node in ast.walk() if node.kind in BRANCHING_KINDS)
