"""Experiment orchestration: leakage sweeps, timeline runners, summaries."""

from leakproof.experiments.sweep import (
    RunResult,
    SweepConfig,
    SweepReport,
    build_sweep_training_set,
    run_sweep,
    similarity_analysis,
)
from leakproof.experiments.timeline import TimelineReport, TimelineRow, run_timeline
from leakproof.experiments.reporting import SweepSummary, summarize

__all__ = [
    "RunResult",
    "SweepConfig",
    "SweepReport",
    "SweepSummary",
    "TimelineReport",
    "TimelineRow",
    "build_sweep_training_set",
    "run_sweep",
    "run_timeline",
    "similarity_analysis",
    "summarize",
]
