"""Tail asymptotics of sticky reflected Brownian motion in the quadrant."""

import json

from ._core import (
    Model,
    StickytailError,
    branch_points,
    classify_boundary,
    classify_direction,
    classify_marginal,
    ev_norming,
    gumbel_cdf,
    local_time_rates,
    singularity_candidates,
)
from ._core import _analyze, _verify

__all__ = [
    "Model",
    "StickytailError",
    "analyze",
    "branch_points",
    "classify_boundary",
    "classify_direction",
    "classify_marginal",
    "ev_norming",
    "gumbel_cdf",
    "local_time_rates",
    "singularity_candidates",
    "verify",
]


def analyze(config):
    """Analytic report for a config dict (same schema as the CLI)."""
    return json.loads(_analyze(json.dumps(config)))


def verify(config, threads=1):
    """Full simulate-and-compare report. Expensive with default budgets."""
    return json.loads(_verify(json.dumps(config), threads))
