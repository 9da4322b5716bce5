"""
Reading JSON reports back and comparing them fact by fact.
"""
from dataclasses import dataclass, field
from pathlib import Path

from pydantic import ValidationError

from models.data_models import CoverageReport
from models.errors import ReportSchemaError

from .text import format_arm


def parse_report(text: str, origin: str = "<report>") -> CoverageReport:
    try:
        return CoverageReport.model_validate_json(text)
    except ValidationError as exc:
        raise ReportSchemaError(f"{origin}: {exc.errors()[0]['msg']} at {exc.errors()[0]['loc']}") from exc
    except ValueError as exc:
        raise ReportSchemaError(f"{origin}: {exc}") from exc


def read_report(path: str | Path) -> CoverageReport:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ReportSchemaError(f"cannot read {path}: {exc}") from exc
    return parse_report(text, str(path))


def write_report(report: CoverageReport, path: str | Path) -> None:
    Path(path).write_text(report.to_json() + "\n", encoding="utf-8")


def _fact_key(fact: tuple) -> tuple:
    return (fact[0], len(fact), fact[1:])


@dataclass
class ReportDiff:
    """Facts whose executed/missing classification differs between two reports."""
    only_executed_in_a: list[tuple] = field(default_factory=list)
    only_executed_in_b: list[tuple] = field(default_factory=list)
    only_in_a: list[tuple] = field(default_factory=list)   # facts missing from b's universe
    only_in_b: list[tuple] = field(default_factory=list)

    @property
    def identical(self) -> bool:
        return not (self.only_executed_in_a or self.only_executed_in_b or self.only_in_a or self.only_in_b)

    def lines(self) -> list[str]:
        out: list[str] = []
        for label, facts in (
            ("executed only in A", self.only_executed_in_a),
            ("executed only in B", self.only_executed_in_b),
            ("only in A", self.only_in_a),
            ("only in B", self.only_in_b),
        ):
            for fact in facts:
                where = f"{fact[1]}" if len(fact) == 2 else format_arm(fact[1], fact[2])
                out.append(f"{label}: {fact[0]}:{where}")
        return out


def diff_reports(a: CoverageReport, b: CoverageReport) -> ReportDiff:
    executed_a, executed_b = a.executed_facts(), b.executed_facts()
    universe_a = executed_a | a.missing_facts()
    universe_b = executed_b | b.missing_facts()
    shared = universe_a & universe_b
    return ReportDiff(
        only_executed_in_a=sorted((executed_a - executed_b) & shared, key=_fact_key),
        only_executed_in_b=sorted((executed_b - executed_a) & shared, key=_fact_key),
        only_in_a=sorted(universe_a - universe_b, key=_fact_key),
        only_in_b=sorted(universe_b - universe_a, key=_fact_key),
    )
