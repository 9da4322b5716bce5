"""
Building CoverageReports from covered facts.

Probe runs report the facts their probes recorded. Trace runs report the
lines the tracer saw, and infer branches from line-to-line arcs for the
constructs whose every arm leaves its origin line.
"""
from collections import defaultdict
from typing import Iterable

from models.data_models import CoverageReport, CoverageSummary, FileCoverage, percent

from frontend.universe import CoverableUniverse


def build_report(universe: CoverableUniverse, covered: Iterable[tuple], branches: bool) -> CoverageReport:
    """Split every universe fact into executed or missing; facts outside the universe are ignored."""
    covered = set(covered)
    files: dict[str, FileCoverage] = {}
    for file in sorted(universe.files):
        lines = universe.lines_of(file)
        executed = sorted(line for line in lines if (file, line) in covered)
        missing = sorted(lines.difference(executed))
        if branches:
            arms = universe.branches_of(file)
            taken = sorted(arm for arm in arms if (file, *arm) in covered)
            not_taken = sorted(arms.difference(taken))
        else:
            taken, not_taken = [], []
        files[file] = FileCoverage(
            executed_lines=executed,
            missing_lines=missing,
            executed_branches=taken,
            missing_branches=not_taken,
        )
    return CoverageReport(files=files, summary=summarize(files))


def summarize(files: dict[str, FileCoverage]) -> CoverageSummary:
    executed_lines = sum(len(f.executed_lines) for f in files.values())
    all_lines = executed_lines + sum(len(f.missing_lines) for f in files.values())
    executed_branches = sum(len(f.executed_branches) for f in files.values())
    all_branches = executed_branches + sum(len(f.missing_branches) for f in files.values())
    return CoverageSummary(
        line_percent=percent(executed_lines, all_lines),
        branch_percent=percent(executed_branches, all_branches),
    )


def inferable_branches(universe: CoverableUniverse) -> CoverableUniverse:
    """
    The part of the branch universe an arc collector can observe: arms of
    origins whose every arm enters a line other than the origin line.
    Exit arms and claimed-slot arms (dest < 1) have no arc to show for them.
    """
    by_origin: dict[tuple[str, int], set[int]] = defaultdict(set)
    for file, origin, dest in universe.branches:
        by_origin[(file, origin)].add(dest)
    branches = {
        (file, origin, dest)
        for (file, origin), dests in by_origin.items()
        if origin not in dests and min(dests) >= 1
        for dest in dests
    }
    return CoverableUniverse(lines=set(universe.lines), branches=branches)


def build_trace_report(
    universe: CoverableUniverse,
    lines: Iterable[tuple[str, int]],
    arcs: Iterable[tuple[str, int, int]],
    branches: bool,
) -> CoverageReport:
    """Report of a tracing run: executed lines, and arms whose arc was seen."""
    observable = inferable_branches(universe)
    covered = set(lines)
    if branches:
        covered.update(arc for arc in arcs if arc in observable.branches)
    return build_report(observable, covered, branches)
