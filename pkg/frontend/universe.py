"""
Coverable universe: the denominators of every coverage report.
"""
from dataclasses import dataclass, field

from .ast_nodes import AstNode, NodeKind


@dataclass
class CoverableUniverse:
    lines: set[tuple[str, int]] = field(default_factory=set)
    branches: set[tuple[str, int, int]] = field(default_factory=set)

    def lines_of(self, file: str) -> set[int]:
        return {line for f, line in self.lines if f == file}

    def branches_of(self, file: str) -> set[tuple[int, int]]:
        return {(o, d) for f, o, d in self.branches if f == file}

    @property
    def files(self) -> set[str]:
        return {f for f, _ in self.lines} | {f for f, _, _ in self.branches}

    def update(self, other: "CoverableUniverse") -> None:
        self.lines |= other.lines
        self.branches |= other.branches


def enumerate_universe(ast: AstNode) -> CoverableUniverse:
    """Lines holding a real statement, plus the (origin, dest) of every marker."""
    universe = CoverableUniverse()
    file = ast.pos.file
    for node in ast.walk():
        if node.kind == NodeKind.BRANCH_MARKER:
            origin, dest = node.value
            universe.branches.add((file, origin, dest))
        elif node.is_statement and not node.synthetic:
            universe.lines.add((file, node.line))
    return universe
