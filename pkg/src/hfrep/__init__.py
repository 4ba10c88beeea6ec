"""Hybrid function representation toolkit.

Constructive FRep models are converted to smooth signed distance-like
fields through interchangeable routes (vector distance transform, fast
iterative eikonal solves on regular grids and quadtrees, diffusion-map
interior distances), smoothed with C1 interpolants, re-signed with a
sigmoid step of the original defining function, and decorated with
distance-parameterised attributes.
"""

from .errors import DomainError, EmptyBoundaryError, FieldError
from .grid import BoundingBox, ContinuityClass, ScalarGrid, square

__all__ = [
    "BoundingBox",
    "ContinuityClass",
    "DomainError",
    "EmptyBoundaryError",
    "FieldError",
    "ScalarGrid",
    "square",
]

__version__ = "0.1.0"
