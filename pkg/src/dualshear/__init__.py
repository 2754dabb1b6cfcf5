"""Dualizable shearlet frames on a periodized pixel grid."""

from .grid import FourierGrid
from .index import LambdaIndex, ShearParam, k_for, matrices, shear_set

__version__ = "0.1.0"

__all__ = ["FourierGrid", "LambdaIndex", "ShearParam", "k_for", "matrices", "shear_set"]
