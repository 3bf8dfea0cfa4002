"""Seeded experiment harness: runs, sweeps and payoff experiments."""

from .config import RunConfig
from .csvio import emit_csv
from .runner import (
    METRICS_COLUMNS,
    MetricsRow,
    RunSummary,
    Simulation,
    compare_consistency,
    compare_modes,
    payoff_experiment,
    run,
    seed_fanout,
    summarize,
    sweep,
)

__all__ = [
    "METRICS_COLUMNS",
    "MetricsRow",
    "RunConfig",
    "RunSummary",
    "Simulation",
    "compare_consistency",
    "compare_modes",
    "emit_csv",
    "payoff_experiment",
    "run",
    "seed_fanout",
    "summarize",
    "sweep",
]
