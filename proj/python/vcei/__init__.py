"""Python bindings for the vcei cause-effect identification library."""

import json

from ._vcei import (
    InfeasibleBoundError,
    MalformedFileError,
    SolverError,
    UsageError,
    VceiError,
    WeightedGp,
    generate_synthetic,
    gram,
    identify_json,
    load_pair,
    mmd2_biased,
    mmd2_weighted_vs_uniform,
    project_to_simplex,
    select_lengthscale,
    solve_variation,
)


def identify(x, y, **kwargs):
    """Run the pipeline on one pair and return the report as a dict.

    Passing ``grid`` (ascending b_alpha values) switches to trend mode.
    """
    return json.loads(identify_json(x, y, **kwargs))


__all__ = [
    "InfeasibleBoundError",
    "MalformedFileError",
    "SolverError",
    "UsageError",
    "VceiError",
    "WeightedGp",
    "generate_synthetic",
    "gram",
    "identify",
    "identify_json",
    "load_pair",
    "mmd2_biased",
    "mmd2_weighted_vs_uniform",
    "project_to_simplex",
    "select_lengthscale",
    "solve_variation",
]
