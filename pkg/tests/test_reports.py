import io
import json

import pytest
from rich.console import Console

from models import CoverageReport, EngineStats, FileCoverage, ReportSchemaError, percent

from frontend import CoverableUniverse
from reports import (
    build_report,
    build_trace_report,
    diff_reports,
    format_arm,
    format_missing,
    inferable_branches,
    line_ranges,
    parse_report,
    partial_branches,
    read_report,
    render_report,
    render_stats,
    write_report,
)


def _universe() -> CoverableUniverse:
    return CoverableUniverse(
        lines={("a.mini", n) for n in (1, 2, 3, 5, 6)},
        branches={("a.mini", 2, 3), ("a.mini", 2, 5)},
    )


def _report(covered) -> CoverageReport:
    return build_report(_universe(), covered, branches=True)


@pytest.mark.parametrize("lines, expected", [
    ([], []),
    ([4], ["4"]),
    ([3, 4, 5, 9], ["3-5", "9"]),
    ([9, 1, 2], ["1-2", "9"]),
])
def test_line_ranges(lines, expected):
    assert line_ranges(lines) == expected


def test_empty_universe_counts_as_covered():
    assert percent(0, 0) == 100.0
    report = build_report(CoverableUniverse(), set(), branches=True)
    assert report.summary.line_percent == report.summary.branch_percent == 100.0


class TestBuildReport:
    def test_split_into_executed_and_missing(self):
        report = _report({("a.mini", 1), ("a.mini", 2), ("a.mini", 3), ("a.mini", 2, 3)})
        coverage = report.files["a.mini"]
        assert coverage.executed_lines == [1, 2, 3]
        assert coverage.missing_lines == [5, 6]
        assert coverage.executed_branches == [(2, 3)]
        assert coverage.missing_branches == [(2, 5)]
        assert report.summary.line_percent == 60.0
        assert report.summary.branch_percent == 50.0

    def test_facts_outside_the_universe_are_ignored(self):
        report = _report({("a.mini", 40), ("b.mini", 1)})
        assert report.executed_facts() == set()

    def test_line_only_reports_have_no_branches(self):
        report = build_report(_universe(), {("a.mini", 2, 3)}, branches=False)
        assert report.files["a.mini"].missing_branches == []
        assert report.summary.branch_percent == 100.0

    def test_partial_branches(self):
        coverage = FileCoverage(executed_branches=[(2, 3), (7, 8)], missing_branches=[(2, 5)])
        assert partial_branches(coverage) == 1

    def test_format_missing(self):
        coverage = _report({("a.mini", 1)}).files["a.mini"]
        assert format_missing(coverage) == "2-3, 5-6, 2->3, 2->5"

    @pytest.mark.parametrize("dest, text", [(5, "3->5"), (0, "3->exit"), (-2, "3->arm2")])
    def test_format_arm(self, dest, text):
        assert format_arm(3, dest) == text


class TestTraceReports:
    def test_same_line_origins_are_not_inferable(self):
        universe = CoverableUniverse(
            lines={("s.mini", 1), ("s.mini", 2), ("s.mini", 3)},
            branches={("s.mini", 2, 2), ("s.mini", 2, 3), ("s.mini", 1, 2)},
        )
        assert inferable_branches(universe).branches == {("s.mini", 1, 2)}

    def test_exit_and_slot_arms_are_not_inferable(self):
        universe = CoverableUniverse(
            branches={("s.mini", 2, 3), ("s.mini", 2, 0), ("s.mini", 5, 6), ("s.mini", 5, -2), ("s.mini", 8, 9), ("s.mini", 8, 10)},
        )
        assert inferable_branches(universe).branches == {("s.mini", 8, 9), ("s.mini", 8, 10)}

    def test_arcs_become_branches(self):
        report = build_trace_report(
            _universe(),
            lines={("a.mini", 1), ("a.mini", 2), ("a.mini", 5)},
            arcs={("a.mini", 1, 2), ("a.mini", 2, 5)},
            branches=True,
        )
        coverage = report.files["a.mini"]
        assert coverage.executed_branches == [(2, 5)]
        assert coverage.missing_branches == [(2, 3)]
        assert coverage.missing_lines == [3, 6]


class TestJson:
    def test_round_trip(self, tmp_path):
        report = _report({("a.mini", 1), ("a.mini", 2, 5)})
        path = tmp_path / "report.json"
        write_report(report, path)
        assert read_report(path) == report

    def test_field_names(self):
        data = json.loads(_report(set()).to_json())
        assert set(data) == {"files", "summary"}
        assert set(data["files"]["a.mini"]) == {
            "executed_lines", "missing_lines", "executed_branches", "missing_branches",
        }
        assert set(data["summary"]) == {"line_percent", "branch_percent"}

    @pytest.mark.parametrize("text", [
        "not json",
        '{"files": {}}',
        '{"files": {}, "summary": {"line_percent": 1, "branch_percent": 1}, "extra": 1}',
        '{"files": {"a": {"executed_lines": ["x"]}}, "summary": {"line_percent": 1, "branch_percent": 1}}',
    ])
    def test_schema_errors(self, text):
        with pytest.raises(ReportSchemaError):
            parse_report(text)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ReportSchemaError):
            read_report(tmp_path / "missing.json")


class TestDiff:
    def test_identical(self):
        facts = {("a.mini", 1), ("a.mini", 2, 3)}
        assert diff_reports(_report(facts), _report(set(facts))).identical

    def test_different_classification(self):
        diff = diff_reports(_report({("a.mini", 1)}), _report({("a.mini", 2), ("a.mini", 2, 3)}))
        assert diff.only_executed_in_a == [("a.mini", 1)]
        assert diff.only_executed_in_b == [("a.mini", 2), ("a.mini", 2, 3)]
        assert diff.lines()[-1] == "executed only in B: a.mini:2->3"

    def test_different_universes(self):
        other = build_report(CoverableUniverse(lines={("b.mini", 1)}), set(), branches=True)
        diff = diff_reports(_report(set()), other)
        assert ("b.mini", 1) in diff.only_in_b
        assert not diff.identical


class TestRendering:
    def _console(self) -> tuple[Console, io.StringIO]:
        buffer = io.StringIO()
        return Console(file=buffer, width=160, color_system=None), buffer

    def test_report_table(self):
        console, buffer = self._console()
        render_report(_report({("a.mini", 1), ("a.mini", 2, 3)}), console, branches=True)
        text = buffer.getvalue()
        assert "a.mini" in text
        assert "TOTAL" in text
        assert "20.0%" in text
        assert "Partial" in text

    def test_line_only_table_has_no_branch_columns(self):
        console, buffer = self._console()
        render_report(_report(set()), console, branches=False)
        assert "Branch %" not in buffer.getvalue()

    def test_stats_table(self):
        console, buffer = self._console()
        render_stats(EngineStats(fires=7, batches=2), console)
        text = buffer.getvalue()
        assert "stale fires" in text
        assert "7" in text
