"""
Orchestrator - wires loader, coverage engine and VM together for one run.
"""
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, TextIO

from models.data_models import (
    CoverageMode,
    CoverageReport,
    DecovConfig,
    Deinstrumentation,
    EngineStats,
    LoadPolicy,
    RunMode,
    TraceConfig,
    TraceMode,
)

from engine.coverage_engine import CoverageEngine
from frontend.interpreter import InterpResult, interpret
from loader.module_loader import ModuleLoader, ModuleState
from reports.builder import build_report, build_trace_report
from utils.log import get_logger
from vm.machine import ExecutionResult, VirtualMachine
from vm.registry import FunctionRegistry
from vm.tracing import CollectingTracer

logger = get_logger("Orchestrator")


@dataclass
class RunOutcome:
    mode: RunMode
    execution: ExecutionResult
    report: Optional[CoverageReport] = None
    stats: Optional[EngineStats] = None

    @property
    def status(self) -> int:
        return self.execution.status


class CoverageOrchestrator:
    """
    Runs one Mini program under one coverage mode:
    1. Loader parses, transforms and (per policy) instruments the main module
    2. Optional preloads go through the same pipeline before execution
    3. The VM executes with the engine as probe sink, or with a tracer
    4. Covered facts become a CoverageReport over the loaded universe
    """

    def __init__(
        self,
        program: str | Path,
        config: Optional[DecovConfig] = None,
        run_mode: RunMode = RunMode.PROBE_FULL,
        coverage_mode: CoverageMode = CoverageMode.LINE,
        include: Optional[list[str]] = None,
        preload: Optional[list[str]] = None,
        stdout: Optional[TextIO] = None,
    ):
        self.program = Path(program).resolve()
        self.config = config or DecovConfig()
        self.run_mode = run_mode
        self.coverage_mode = coverage_mode
        self.include = [str(Path(p).resolve()) for p in include] if include else [str(self.program.parent)]
        self.preload = list(preload or [])
        self.stdout = stdout

        self.registry = FunctionRegistry()
        self.engine: Optional[CoverageEngine] = None
        if run_mode.uses_probes:
            self.engine = CoverageEngine(
                self.registry,
                threshold=self.config.threshold,
                deinstrumentation=self._deinstrumentation(),
                debug=self.config.debug,
            )
        self.policy = LoadPolicy(include_prefixes=self.include, mode=coverage_mode)
        self.loader = ModuleLoader(self.policy, run_mode, self.engine, self.registry)

    def _deinstrumentation(self) -> Deinstrumentation:
        # probe-full follows DECOV_NO_ELIM / DECOV_NO_DEINSTR; the ablation modes are explicit
        if self.run_mode == RunMode.PROBE_FULL:
            return self.config.deinstrumentation
        return self.run_mode.deinstrumentation

    @property
    def branches(self) -> bool:
        return self.policy.branch

    def trace_config(self) -> TraceConfig:
        prefix = os.path.commonpath(self.include) if self.include else ""
        return TraceConfig(mode=self.run_mode.trace_mode, path_prefix=prefix)

    def run(self) -> RunOutcome:
        self.loader.preload(self.preload)
        root, module = self.loader.begin(self.program)

        vm = VirtualMachine(
            registry=self.registry,
            probe_sink=self.engine,
            trace=self.trace_config(),
            max_frames=self.config.max_frames,
            loader=self.loader,
            stdout=self.stdout,
            on_skip=self.engine.check_skip if self.engine is not None and self.config.debug else None,
        )
        logger.info("running %s in %s mode", module, self.run_mode.value)
        execution = vm.run(root, module)
        self.loader.finish_module(module)

        outcome = RunOutcome(self.run_mode, execution)
        if self.engine is not None:
            outcome.report = build_report(self.loader.universe, self.engine.snapshot(), self.branches)
            outcome.stats = self.engine.stats()
            logger.debug("engine: %s", outcome.stats.model_dump())
        elif self.run_mode.trace_mode == TraceMode.COLLECT and isinstance(vm.tracer, CollectingTracer):
            outcome.report = build_trace_report(self.loader.universe, vm.tracer.lines, vm.tracer.arcs, self.branches)
        return outcome

    def run_oracle(self) -> tuple[InterpResult, CoverageReport]:
        """Reference run of the tree-walking interpreter; only its branch facts are reported."""
        self.loader.preload(self.preload)
        root = self.loader.load(self.program)
        root.state = ModuleState.DONE
        result = interpret(root.ast, max_frames=self.config.max_frames, load_hook=self.loader.interpreter_hook)
        report = build_report(self.loader.universe, result.branches, branches=True)
        return result, report
