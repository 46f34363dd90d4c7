"""Dyadic maximal operators, weight characteristics and Carleson embeddings on the unit cube."""

from .dyadic import ArbitraryCube, DyadicCube, enumerate_cubes, shifted_cover
from .gridfunc import ExponentConfig, GridFunction, Weight, average, exp_mean_inverse, lp_norm, mass, weighted_average

__all__ = [
    "ArbitraryCube",
    "DyadicCube",
    "ExponentConfig",
    "GridFunction",
    "Weight",
    "average",
    "enumerate_cubes",
    "exp_mean_inverse",
    "lp_norm",
    "mass",
    "shifted_cover",
    "weighted_average",
]
