from .harness import BENCH_MODES, BenchHarness, render_results, results_frame

__all__ = ["BENCH_MODES", "BenchHarness", "render_results", "results_frame"]
