"""Numerical kernels: special functions, tail probabilities, bounded simplex search."""
from corrshift.numerics.optimize import PENALTY, BoundBox, OptimResult, minimize
from corrshift.numerics.special import (
    f_cdf,
    f_sf,
    ln_gamma,
    normal_cdf,
    normal_sf,
    reg_incomplete_beta,
    t_cdf,
    t_sf,
)

__all__ = [
    "PENALTY",
    "BoundBox",
    "OptimResult",
    "f_cdf",
    "f_sf",
    "ln_gamma",
    "minimize",
    "normal_cdf",
    "normal_sf",
    "reg_incomplete_beta",
    "t_cdf",
    "t_sf",
]
