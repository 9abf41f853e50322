"""Computational kit for two-dimensional affine connections.

Exact symbolic tensor calculus, affine Killing field solving by jet
prolongation, Lie-algebra classification of the Killing algebra, and
numeric construction/verification of distinguished coordinate charts.
"""

from .killing import VectorField, is_killing, killing_jet_space
from .liealg import classify, structure_constants
from .scalars import Scalar
from .surface import (AffineSurface, curvature, is_flat, make_surface,
                      nabla_ricci, ricci, sphere, torsion, type_a, type_b)
from .symexpr import Expr, parse

__all__ = [
    "AffineSurface", "Expr", "Scalar", "VectorField",
    "classify", "curvature", "is_flat", "is_killing", "killing_jet_space",
    "make_surface", "nabla_ricci", "parse", "ricci", "sphere",
    "structure_constants", "torsion", "type_a", "type_b",
]
