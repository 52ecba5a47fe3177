"""Manifold geometries."""

from .grassmann import Grassmann, principal_angles
from .hyperbolic import (
    LorentzHyperboloid,
    PoincareBall,
    ball_to_hyperboloid,
    hyperboloid_to_ball,
    mobius_add,
)
from .hypersphere import Hypersphere
from .spd import SPDAffineInvariant, SPDLogEuclidean

__all__ = [
    "Grassmann",
    "Hypersphere",
    "LorentzHyperboloid",
    "PoincareBall",
    "SPDAffineInvariant",
    "SPDLogEuclidean",
    "ball_to_hyperboloid",
    "hyperboloid_to_ball",
    "mobius_add",
    "principal_angles",
]
