#!/usr/bin/env python3
"""
decov - line and branch coverage for Mini through self-removing bytecode probes

Usage:
    python main.py run prog.mini --branch            # Run with coverage, text report
    python main.py run prog.mini --json --report r.json
    python main.py bench benchmarks/                 # Overhead of every run mode
    python main.py dis prog.minic                    # Disassemble
    python main.py dump-ast --transformed prog.mini  # Transformed tree as s-expressions
    python main.py compile prog.mini -o prog.minic
    python main.py instrument prog.mini --branch -o prog.inst.minic --dis
    python main.py diff a.json b.json
"""
import argparse
import sys
from contextlib import nullcontext
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from rich.console import Console

from models import (
    CompileError,
    ConfigError,
    CoverageEngineError,
    CoverageMode,
    DecovError,
    InstrumentationError,
    LoadError,
    ParseError,
    ReportSchemaError,
    RunMode,
    TransformError,
    VerificationError,
    VMFault,
)
from utils.log import configure_logging, get_logger
from utils.settings import load_settings

EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_FAULT = 2

DATA_ERRORS = (ParseError, TransformError, CompileError, LoadError, ReportSchemaError, InstrumentationError)
FAULT_ERRORS = (VMFault, VerificationError, CoverageEngineError)

logger = get_logger("CLI")


class UsageError(Exception):
    pass


class DecovArgumentParser(argparse.ArgumentParser):
    """argparse that reports usage errors with status 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = DecovArgumentParser(
        prog="decov",
        description="Line and branch coverage for Mini programs with self-removing probes",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=DecovArgumentParser)

    run = sub.add_parser("run", help="Run a program and report its coverage")
    run.add_argument("file", help="Program to run (.mini or .minic)")
    run.add_argument("--branch", action="store_true", help="Collect branch coverage as well as lines")
    run.add_argument(
        "--mode",
        choices=[m.value for m in RunMode],
        default=RunMode.PROBE_FULL.value,
        help="How coverage is collected (default: probe-full)"
    )
    run.add_argument("--threshold", type=int, default=None, help="Probe counter value that triggers a batch")
    run.add_argument("--include", action="append", default=None, help="Instrument modules under this prefix (repeatable)")
    run.add_argument("--preload", action="append", default=None, help="Load and instrument a module before running")
    run.add_argument("--report", default=None, help="Write the report here ('-' for stdout)")
    run.add_argument("--json", action="store_true", help="Write the report as JSON")
    run.add_argument("--stats", action="store_true", help="Print engine statistics to stderr")
    run.add_argument("--debug", action="store_true", default=None, help="Check eliminated-probe jumps")

    bench = sub.add_parser("bench", help="Time every run mode on a suite of programs")
    bench.add_argument("suite", help="Directory of .mini programs, or one program")
    bench.add_argument("--runs", type=int, default=None, help="Runs per mode (>= 5)")
    bench.add_argument("--threshold", type=int, default=None)
    bench.add_argument("--branch", action="store_true")
    bench.add_argument("--jobs", type=int, default=1, help="Programs measured side by side")
    bench.add_argument("--json", default=None, help="Also write results as JSON to this path")

    dis = sub.add_parser("dis", help="Disassemble a program")
    dis.add_argument("file", help=".minic container or .mini source")
    dis.add_argument("--transformed", action="store_true", help="Compile .mini input after the branch transform")

    dump = sub.add_parser("dump-ast", help="Print the syntax tree")
    dump.add_argument("file")
    dump.add_argument("--transformed", action="store_true", help="Apply the branch transform first")

    comp = sub.add_parser("compile", help="Compile the transformed program into a container")
    comp.add_argument("file")
    comp.add_argument("-o", "--output", required=True)

    inst = sub.add_parser("instrument", help="Insert probes and write the result")
    inst.add_argument("file", help=".mini source or uninstrumented .minic")
    inst.add_argument("--branch", action="store_true")
    inst.add_argument("-o", "--output", default=None)
    inst.add_argument("--dis", action="store_true", help="Print the instrumented disassembly")

    diff = sub.add_parser("diff", help="Compare two JSON reports")
    diff.add_argument("report_a")
    diff.add_argument("report_b")

    return parser


# -- helpers -----------------------------------------------------------

def _read_source(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc


def _compiled(path: Path, transformed: bool):
    """CodeObject for `path`: containers as stored, sources compiled (optionally transformed)."""
    from compiler import compile_ast, read_container
    from frontend import parse
    from transform import transform

    if path.suffix == ".minic":
        return read_container(path)
    ast = parse(_read_source(path), str(path))
    return compile_ast(transform(ast) if transformed else ast)


def _open_output(target: str | None):
    if target in (None, "-"):
        return nullcontext(sys.stdout)
    return open(target, "w", encoding="utf-8")


# -- subcommands -------------------------------------------------------

def cmd_run(args) -> int:
    from reports import render_report, render_stats
    from runner import CoverageOrchestrator

    config = load_settings(threshold=args.threshold, debug=args.debug)
    configure_logging(config.log_level)
    mode = RunMode(args.mode)
    orchestrator = CoverageOrchestrator(
        program=args.file,
        config=config,
        run_mode=mode,
        coverage_mode=CoverageMode.BRANCH if args.branch else CoverageMode.LINE,
        include=args.include,
        preload=args.preload,
        stdout=sys.stdout,
    )
    outcome = orchestrator.run()
    sys.stdout.flush()

    if outcome.execution.status == 1:
        for source, name, line in outcome.execution.traceback:
            print(f"  {source}:{line} in {name}", file=sys.stderr)
        print(f"uncaught exception: {outcome.execution.error}", file=sys.stderr)
    elif outcome.execution.status == EXIT_FAULT:
        print(f"VM fault: {outcome.execution.error}", file=sys.stderr)

    if outcome.report is not None:
        with _open_output(args.report) as out:
            if args.json:
                out.write(outcome.report.to_json() + "\n")
            else:
                render_report(outcome.report, Console(file=out), branches=args.branch, root=Path.cwd())
    if args.stats and outcome.stats is not None:
        render_stats(outcome.stats, Console(stderr=True))
    return outcome.status


def cmd_bench(args) -> int:
    import json

    from bench import BenchHarness, render_results

    config = load_settings(bench_runs=args.runs)
    configure_logging(config.log_level)
    harness = BenchHarness(
        args.suite, runs=config.bench_runs, threshold=args.threshold, branch=args.branch, jobs=args.jobs,
    )
    results = harness.run()
    render_results(results, Console())
    if args.json:
        Path(args.json).write_text(
            json.dumps([r.model_dump(mode="json") for r in results], indent=2) + "\n",
            encoding="utf-8",
        )
    return 0


def cmd_dis(args) -> int:
    from compiler import disassemble

    print(disassemble(_compiled(Path(args.file), args.transformed)))
    return 0


def cmd_dump_ast(args) -> int:
    from frontend import dump_ast, parse
    from transform import transform

    path = Path(args.file)
    ast = parse(_read_source(path), str(path))
    print(dump_ast(transform(ast) if args.transformed else ast))
    return 0


def cmd_compile(args) -> int:
    from compiler import check, write_container

    path = Path(args.file)
    if path.suffix == ".minic":
        raise UsageError("compile expects a .mini source")
    code = check(_compiled(path, transformed=True))
    write_container(code, args.output)
    logger.info("wrote %s", args.output)
    return 0


def cmd_instrument(args) -> int:
    from compiler import compile_ast, disassemble, is_instrumented, read_container, write_container
    from frontend import enumerate_universe, parse
    from instrumenter import insert_probes
    from loader import universe_from_code
    from transform import transform

    path = Path(args.file).resolve()
    module = str(path)
    if path.suffix == ".minic":
        code = read_container(path)
        if is_instrumented(code):
            raise LoadError(f"{module} already holds probes")
        universe = universe_from_code(code, code.source)
        module = code.source
    else:
        tree = transform(parse(_read_source(path), module))
        code = compile_ast(tree)
        universe = enumerate_universe(tree)
    mode = CoverageMode.BRANCH if args.branch else CoverageMode.LINE
    instrumented, probe_map = insert_probes(code, universe, mode, module=module)
    logger.info("%d probes inserted, %d relocation rounds", len(probe_map.sites), probe_map.relocation_rounds)
    if args.output:
        write_container(instrumented, args.output)
    if args.dis or not args.output:
        print(disassemble(instrumented))
    return 0


def cmd_diff(args) -> int:
    from reports import diff_reports, read_report

    result = diff_reports(read_report(args.report_a), read_report(args.report_b))
    if result.identical:
        print("reports are identical")
        return 0
    for line in result.lines():
        print(line)
    return 1


COMMANDS = {
    "run": cmd_run,
    "bench": cmd_bench,
    "dis": cmd_dis,
    "dump-ast": cmd_dump_ast,
    "compile": cmd_compile,
    "instrument": cmd_instrument,
    "diff": cmd_diff,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except FAULT_ERRORS as e:
        print(f"fatal: {e}", file=sys.stderr)
        return EXIT_FAULT
    except DecovError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAULT
    except KeyboardInterrupt:
        print("\ninterrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
