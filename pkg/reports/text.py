"""
Terminal rendering of coverage reports and run statistics.
"""
from collections import defaultdict
from pathlib import Path
from typing import Optional

from rich.console import Console
from rich.table import Table

from models.data_models import CoverageReport, EngineStats, FileCoverage


def line_ranges(lines: list[int]) -> list[str]:
    """Compress sorted line numbers: [3, 4, 5, 9] -> ["3-5", "9"]."""
    ranges: list[str] = []
    start = previous = None
    for line in sorted(lines):
        if previous is not None and line == previous + 1:
            previous = line
            continue
        if start is not None:
            ranges.append(str(start) if start == previous else f"{start}-{previous}")
        start = previous = line
    if start is not None:
        ranges.append(str(start) if start == previous else f"{start}-{previous}")
    return ranges


def format_arm(origin: int, dest: int) -> str:
    """`3->5`; exits render as `3->exit` and claimed slots as `3->arm2`."""
    if dest == 0:
        return f"{origin}->exit"
    if dest < 0:
        return f"{origin}->arm{-dest}"
    return f"{origin}->{dest}"


def format_missing(coverage: FileCoverage) -> str:
    parts = line_ranges(coverage.missing_lines)
    parts.extend(format_arm(origin, dest) for origin, dest in coverage.missing_branches)
    return ", ".join(parts)


def partial_branches(coverage: FileCoverage) -> int:
    """Origins with at least one arm taken and one arm missed."""
    arms: dict[int, list[bool]] = defaultdict(list)
    for origin, _ in coverage.executed_branches:
        arms[origin].append(True)
    for origin, _ in coverage.missing_branches:
        arms[origin].append(False)
    return sum(1 for taken in arms.values() if any(taken) and not all(taken))


def _display_name(path: str, root: Optional[Path]) -> str:
    if root is None:
        return path
    try:
        return str(Path(path).relative_to(root))
    except ValueError:
        return path


def render_report(report: CoverageReport, console: Console, branches: bool, root: Optional[Path] = None) -> None:
    table = Table(title="Coverage report", show_footer=True)
    table.add_column("File", footer="TOTAL")
    statements = sum(len(f.executed_lines) + len(f.missing_lines) for f in report.files.values())
    missing = sum(len(f.missing_lines) for f in report.files.values())
    table.add_column("Stmts", justify="right", footer=str(statements))
    table.add_column("Miss", justify="right", footer=str(missing))
    table.add_column("Line %", justify="right", footer=f"{report.summary.line_percent:.1f}%")
    if branches:
        arms = sum(len(f.executed_branches) + len(f.missing_branches) for f in report.files.values())
        partial = sum(partial_branches(f) for f in report.files.values())
        table.add_column("Branches", justify="right", footer=str(arms))
        table.add_column("Partial", justify="right", footer=str(partial))
        table.add_column("Branch %", justify="right", footer=f"{report.summary.branch_percent:.1f}%")
    table.add_column("Missing")

    for path, coverage in sorted(report.files.items()):
        row = [
            _display_name(path, root),
            str(len(coverage.executed_lines) + len(coverage.missing_lines)),
            str(len(coverage.missing_lines)),
            f"{coverage.line_percent:.1f}%",
        ]
        if branches:
            row += [
                str(len(coverage.executed_branches) + len(coverage.missing_branches)),
                str(partial_branches(coverage)),
                f"{coverage.branch_percent:.1f}%",
            ]
        row.append(format_missing(coverage))
        table.add_row(*row)
    console.print(table)


def render_stats(stats: EngineStats, console: Console) -> None:
    table = Table(title="Coverage engine")
    table.add_column("Counter")
    table.add_column("Value", justify="right")
    for name, value in stats.rows():
        table.add_row(name, str(value))
    console.print(table)
