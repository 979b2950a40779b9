"""Python bindings for the skillshift C++ library."""

from ._skillshift import (
    Error,
    Problem,
    chain_trace,
    chain_upper_bound,
    dubr,
    enumerate_candidates,
    load_problem,
    parse_problem,
    rpd,
    run_cli,
    sample_variant,
    spearman,
)

__all__ = [
    "Error",
    "Problem",
    "chain_trace",
    "chain_upper_bound",
    "dubr",
    "enumerate_candidates",
    "load_problem",
    "parse_problem",
    "rpd",
    "run_cli",
    "sample_variant",
    "spearman",
]
