"""Conventional and covariance-adaptive recalibrated ensemble Kalman filters."""

from ._carenkf import (
    NonFiniteState,
    NotPositiveDefinite,
    NotPsd,
    car_etkf_transform,
    conventional_etkf_transform,
    ensemble_stats,
    inflate,
    lorenz96_measure,
    lorenz96_rhs,
    make_truth,
    measure_stats,
    posterior_target_trace,
    recenter,
    rk4_step,
    run_experiment,
    slam_measure,
    spd_solve,
    standard_noise_grid,
    sym_sqrt_psd,
    wrap_angle,
)

__version__ = "0.1.0"

__all__ = [
    "NonFiniteState",
    "NotPositiveDefinite",
    "NotPsd",
    "car_etkf_transform",
    "conventional_etkf_transform",
    "ensemble_stats",
    "inflate",
    "lorenz96_measure",
    "lorenz96_rhs",
    "make_truth",
    "measure_stats",
    "posterior_target_trace",
    "recenter",
    "rk4_step",
    "run_experiment",
    "slam_measure",
    "spd_solve",
    "standard_noise_grid",
    "sym_sqrt_psd",
    "wrap_angle",
]
