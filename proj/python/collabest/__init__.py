"""Collaborative mean estimation under resource constraints."""

from ._core import (
    CollabError,
    Model,
    arm_one_z,
    best_trivariate_sample_type,
    bivariate_threshold,
    ci_width,
    crb_curve,
    crb_scenario2_bivariate,
    fi_subset,
    make_schedule,
    optimal_weights_bivariate,
    oracle_static_arm,
    region_grid,
    run_fig6,
    solve_scenario1_lp,
    table3_policy,
    trivariate_beats_bivariate,
    trivariate_beats_univariate,
    wilks_variance,
)

__all__ = [
    "CollabError",
    "Model",
    "arm_one_z",
    "best_trivariate_sample_type",
    "bivariate_threshold",
    "ci_width",
    "crb_curve",
    "crb_scenario2_bivariate",
    "fi_subset",
    "make_schedule",
    "optimal_weights_bivariate",
    "oracle_static_arm",
    "region_grid",
    "run_fig6",
    "solve_scenario1_lp",
    "table3_policy",
    "trivariate_beats_bivariate",
    "trivariate_beats_univariate",
    "wilks_variance",
]
