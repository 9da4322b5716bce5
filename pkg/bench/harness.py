"""
Benchmark harness: whole-process wall time of every run mode on a suite of
hot-loop programs.

Every run is a child process. The modes of one program take turns run by
run, so drift on the machine hits all of them alike; with `jobs` > 1 several
programs are measured side by side. Each time is the median of R runs minus
a startup constant (the median of mode=none on an empty program); ratios are
taken against mode=none of the same program.
"""
import statistics
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import pandas as pd
from rich.console import Console
from rich.table import Table

from models.data_models import BenchResult, RunMode
from utils.log import get_logger

logger = get_logger("Bench")

MAIN = Path(__file__).resolve().parent.parent / "main.py"
BENCH_MODES = tuple(RunMode)


class BenchHarness:
    def __init__(
        self,
        suite: str | Path,
        runs: int = 5,
        modes: tuple[RunMode, ...] = BENCH_MODES,
        threshold: Optional[int] = None,
        branch: bool = False,
        jobs: int = 1,
    ):
        self.suite = Path(suite)
        self.runs = runs
        self.modes = modes if RunMode.NONE in modes else (RunMode.NONE,) + tuple(modes)
        self.threshold = threshold
        self.branch = branch
        self.jobs = max(1, jobs)
        self.startup = 0.0

    def programs(self) -> list[Path]:
        if self.suite.is_file():
            return [self.suite]
        return sorted(self.suite.glob("*.mini"))

    def _command(self, program: Path, mode: RunMode) -> list[str]:
        command = [sys.executable, str(MAIN), "run", str(program), "--mode", mode.value, "--json", "--report", "-"]
        if self.branch:
            command.append("--branch")
        if self.threshold is not None:
            command += ["--threshold", str(self.threshold)]
        return command

    def time_once(self, program: Path, mode: RunMode) -> float:
        start = time.perf_counter()
        completed = subprocess.run(
            self._command(program, mode),
            stdout=subprocess.DEVNULL,
            stderr=subprocess.PIPE,
            text=True,
        )
        elapsed = time.perf_counter() - start
        if completed.returncode != 0:
            logger.error("%s (%s) exited with %d: %s", program.name, mode.value, completed.returncode,
                         completed.stderr.strip()[-500:])
        return elapsed

    def median(self, program: Path, mode: RunMode) -> float:
        return statistics.median(self.time_once(program, mode) for _ in range(self.runs))

    def measure_startup(self) -> float:
        with tempfile.TemporaryDirectory() as tmp:
            empty = Path(tmp) / "empty.mini"
            empty.write_text("pass\n", encoding="utf-8")
            self.startup = self.median(empty, RunMode.NONE)
        logger.info("startup constant %.4fs", self.startup)
        return self.startup

    def program_medians(self, program: Path) -> dict[RunMode, float]:
        samples: dict[RunMode, list[float]] = {mode: [] for mode in self.modes}
        for _ in range(self.runs):
            for mode in self.modes:
                samples[mode].append(self.time_once(program, mode))
        return {mode: statistics.median(times) for mode, times in samples.items()}

    def run(self) -> list[BenchResult]:
        self.measure_startup()
        programs = self.programs()
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            measured = list(pool.map(self.program_medians, programs))
        results: list[BenchResult] = []
        for program, medians in zip(programs, measured):
            baseline = max(medians[RunMode.NONE] - self.startup, 1e-9)
            for mode in self.modes:
                net = max(medians[mode] - self.startup, 0.0)
                results.append(BenchResult(
                    program=program.name,
                    mode=mode,
                    runs=self.runs,
                    median_seconds=medians[mode],
                    overhead_ratio=1.0 if mode == RunMode.NONE else net / baseline,
                ))
                logger.debug("%s %s: %.4fs", program.name, mode.value, medians[mode])
        return results


def results_frame(results: list[BenchResult]) -> pd.DataFrame:
    """One row per program, one ratio column per mode."""
    df = pd.DataFrame([r.model_dump(mode="json") for r in results])
    if df.empty:
        return df
    return df.pivot(index="program", columns="mode", values="overhead_ratio")


def render_results(results: list[BenchResult], console: Console) -> None:
    frame = results_frame(results)
    table = Table(title="Overhead vs mode=none")
    table.add_column("Program")
    for mode in frame.columns:
        table.add_column(str(mode), justify="right")
    for program, row in frame.iterrows():
        table.add_row(str(program), *(f"{value:.2f}x" for value in row))
    console.print(table)
