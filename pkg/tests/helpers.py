"""Shared pipeline shortcuts for the test-suite."""
from pathlib import Path
from typing import Optional

from models import CoverageMode, DecovConfig, RunMode

from compiler import CodeObject, compile_ast
from frontend import parse
from runner import CoverageOrchestrator, RunOutcome
from transform import transform

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
BENCHMARKS = ROOT / "benchmarks"
GOLDEN = Path(__file__).resolve().parent / "golden"

PROBE_MODES = (RunMode.PROBE_FULL, RunMode.PROBE_FLAG_ONLY, RunMode.PROBE_NO_DEINSTR)


def corpus_programs() -> list[Path]:
    return sorted(CORPUS.glob("*.mini"))


def compile_source(text: str, file: str = "prog.mini", transformed: bool = False) -> CodeObject:
    tree = parse(text, file)
    return compile_ast(transform(tree) if transformed else tree)


def write_program(directory: Path, name: str, text: str) -> Path:
    path = directory / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def orchestrator(
    program: Path,
    mode: RunMode = RunMode.PROBE_FULL,
    branch: bool = False,
    threshold: int = 64,
    debug: bool = True,
    include: Optional[list[str]] = None,
    preload: Optional[list[str]] = None,
) -> CoverageOrchestrator:
    return CoverageOrchestrator(
        program=program,
        config=DecovConfig(threshold=threshold, debug=debug),
        run_mode=mode,
        coverage_mode=CoverageMode.BRANCH if branch else CoverageMode.LINE,
        include=include,
        preload=preload,
    )


def run_file(program: Path, mode: RunMode = RunMode.PROBE_FULL, branch: bool = False, **kwargs) -> RunOutcome:
    return orchestrator(program, mode, branch, **kwargs).run()


def oracle_branches(program: Path, **kwargs) -> set[tuple]:
    """Executed branch facts of the reference interpreter."""
    _, report = orchestrator(program, RunMode.PROBE_FULL, branch=True, **kwargs).run_oracle()
    return report.executed_facts()


def branch_facts(outcome: RunOutcome) -> set[tuple]:
    return {fact for fact in outcome.report.executed_facts() if len(fact) == 3}


def line_facts(outcome: RunOutcome) -> set[tuple]:
    return {fact for fact in outcome.report.executed_facts() if len(fact) == 2}
