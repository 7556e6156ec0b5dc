"""Hierarchical Tucker cross approximation (HTBB) and HTOpt optimization."""

import json

from ._core import (
    Error,
    HTTensor,
    Oracle,
    SweepConfig,
    TreeTopology,
    benchmark_domain,
    benchmarks,
    chebyshev_grid,
    eval_benchmark,
    ht_cross,
    ht_opt,
    maxvol_rect,
    maxvol_square,
    random_search,
    relative_l2_error,
)
from ._core import run as _run

__all__ = [
    "Error",
    "HTTensor",
    "Oracle",
    "SweepConfig",
    "TreeTopology",
    "benchmark_domain",
    "benchmarks",
    "chebyshev_grid",
    "eval_benchmark",
    "ht_cross",
    "ht_opt",
    "maxvol_rect",
    "maxvol_square",
    "random_search",
    "relative_l2_error",
    "run",
]


def run(mode, function, **options):
    """Run one experiment like the CLI does and return the report as a dict."""
    return json.loads(_run(mode, function, **options))
