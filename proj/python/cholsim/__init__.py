"""Deterministic gallbladder-dissection simulator bindings."""

from ._core import (
    CholsimError,
    boundary_deviation,
    config_hash,
    default_scenario_json,
    largest_component,
    pca_axes,
    replay_metrics_json,
    run_scenario_json,
    run_trial,
    select_target,
    spline_rmse,
    thin_mask,
)

__all__ = [
    "CholsimError",
    "boundary_deviation",
    "config_hash",
    "default_scenario_json",
    "largest_component",
    "pca_axes",
    "replay_metrics_json",
    "run_scenario_json",
    "run_trial",
    "select_target",
    "spline_rmse",
    "thin_mask",
]
