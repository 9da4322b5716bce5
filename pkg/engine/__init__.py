from .coverage_engine import CoverageEngine, CoverageStore, ProbeState

__all__ = ["CoverageEngine", "CoverageStore", "ProbeState"]
