from .builder import build_report, build_trace_report, inferable_branches, summarize
from .diff import ReportDiff, diff_reports, parse_report, read_report, write_report
from .text import format_arm, format_missing, line_ranges, partial_branches, render_report, render_stats

__all__ = [
    "build_report",
    "build_trace_report",
    "inferable_branches",
    "summarize",
    "ReportDiff",
    "diff_reports",
    "parse_report",
    "read_report",
    "write_report",
    "format_arm",
    "format_missing",
    "line_ranges",
    "partial_branches",
    "render_report",
    "render_stats",
]
