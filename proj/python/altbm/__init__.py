"""Flip-flop constructions of alternating Brownian motions.

Matrices are lists of rows. Errors raise InvalidArgument (a ValueError) or
NumericalError (an ArithmeticError).
"""

from ._altbm import (
    InvalidArgument,
    NumericalError,
    convergence_sweep,
    corr_exp,
    corr_map,
    cov_laplace,
    cov_map,
    exp_alt_generator,
    map_alt_generator,
    mc_correlation_exp,
    mc_correlation_map,
    simulate_exp_alternating,
    simulate_map_alternating,
    standard_generator,
)

__all__ = [
    "InvalidArgument",
    "NumericalError",
    "convergence_sweep",
    "corr_exp",
    "corr_map",
    "cov_laplace",
    "cov_map",
    "exp_alt_generator",
    "map_alt_generator",
    "mc_correlation_exp",
    "mc_correlation_map",
    "simulate_exp_alternating",
    "simulate_map_alternating",
    "standard_generator",
]
