from .orchestrator import CoverageOrchestrator, RunOutcome

__all__ = ["CoverageOrchestrator", "RunOutcome"]
