"""Catalog of named constructive models.

Documented operation counts (set-theoretic operations in the tree):

    star         7   eight radial triangles, unioned
    bat         14   fifteen triangles and rectangles, unions + one subtract
    robot       39   forty circles and rectangles
    heart        0   single analytic primitive
    treble-clef  5   stem, two rings and a dot (thin, curve-like strokes)
    disc         0   single circle r=0.6 (convex reference shape)
    sphere3d     0   unit sphere (3D)
    slabsphere3d 1   unit sphere with slab cut-outs (3D microstructure)

The geometry is illustrative: coordinates were chosen by hand to give
plausible silhouettes with the documented op counts, not to replicate
any particular artwork.
"""

from __future__ import annotations

import math

import numpy as np

from . import frep
from .attributes import SlabComponent
from .grid import BoundingBox, square


def _unit(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def build_star() -> frep.FRepNode:
    """Eight-pointed star: 8 triangles, 7 unions, solid core around the origin."""
    tris = []
    for k in range(8):
        th = k * math.pi / 4
        apex = 0.8 * _unit(th)
        b1 = 0.3 * _unit(th + math.radians(110))
        b2 = 0.3 * _unit(th - math.radians(110))
        tris.append(frep.Triangle2D(apex, b1, b2))
    return frep.union(*tris)


def build_bat() -> frep.FRepNode:
    """Bat silhouette from 15 triangles/rectangles, 14 unions."""
    body = frep.Rectangle(0.0, -0.05, 0.15, 0.30)
    head = frep.Rectangle(0.0, 0.33, 0.12, 0.10)
    parts = [body, head]
    for s in (-1.0, 1.0):
        parts.append(frep.Triangle2D((s * 0.115, 0.40), (s * 0.03, 0.42), (s * 0.09, 0.60)))
    for s in (-1.0, 1.0):
        parts.append(frep.Rectangle(s * 0.28, 0.14, 0.16, 0.05))       # arm
        parts.append(frep.Triangle2D((s * 0.12, 0.24), (s * 0.95, 0.34), (s * 0.18, -0.08)))
        parts.append(frep.Triangle2D((s * 0.17, 0.02), (s * 0.82, 0.16), (s * 0.33, -0.34)))
        parts.append(frep.Triangle2D((s * 0.30, -0.22), (s * 0.74, 0.04), (s * 0.52, -0.34)))
        parts.append(frep.Triangle2D((s * 0.70, -0.10), (s * 0.95, 0.30), (s * 0.92, -0.26)))
    tail = frep.Triangle2D((-0.08, -0.33), (0.08, -0.33), (0.0, -0.56))
    parts.append(tail)
    return frep.union(*parts)


def build_robot() -> frep.FRepNode:
    """Robot from 40 circles/rectangles: 29 unions + 10 subtracts."""
    R = frep.Rectangle
    C = frep.Circle
    solid = [
        R(0.0, 0.58, 0.17, 0.14),          # head
        R(0.0, 0.40, 0.05, 0.05),          # neck
        R(0.0, 0.05, 0.24, 0.31),          # torso
        R(0.0, -0.33, 0.18, 0.08),         # pelvis
    ]
    for s in (-1.0, 1.0):
        solid.append(R(s * 0.08, 0.76, 0.015, 0.05))    # antenna stem
        solid.append(C(s * 0.08, 0.83, 0.03))           # antenna tip
        solid.append(R(s * 0.20, 0.58, 0.025, 0.06))    # ear
        solid.append(C(s * 0.28, 0.30, 0.06))           # shoulder
        solid.append(R(s * 0.31, 0.14, 0.045, 0.13))    # upper arm
        solid.append(C(s * 0.31, -0.01, 0.05))          # elbow
        solid.append(R(s * 0.31, -0.14, 0.04, 0.11))    # forearm
        solid.append(C(s * 0.31, -0.28, 0.06))          # hand
        solid.append(C(s * 0.11, -0.42, 0.05))          # hip
        solid.append(R(s * 0.11, -0.55, 0.045, 0.12))   # thigh
        solid.append(C(s * 0.11, -0.68, 0.045))         # knee
        solid.append(R(s * 0.11, -0.79, 0.04, 0.09))    # shin
        solid.append(R(s * 0.14, -0.90, 0.08, 0.03))    # foot
    assert len(solid) == 30
    body = frep.union(*solid)
    holes = [
        C(-0.08, 0.61, 0.035),             # left eye
        C(0.08, 0.61, 0.035),              # right eye
        R(0.0, 0.51, 0.07, 0.015),         # mouth
        R(0.0, 0.17, 0.10, 0.06),          # chest panel
        C(0.0, -0.02, 0.02),               # button
        C(0.0, -0.09, 0.02),               # button
        C(0.0, -0.16, 0.02),               # button
        R(0.0, -0.33, 0.10, 0.015),        # belt slot
        C(-0.11, -0.68, 0.015),            # knee bolt
        C(0.11, -0.68, 0.015),             # knee bolt
    ]
    out = body
    for hole in holes:
        out = frep.BinaryOp("subtract_r1", out, hole)
    return out


def build_heart() -> frep.FRepNode:
    return frep.Heart2D(scale=1.0)


def build_treble_clef() -> frep.FRepNode:
    """Curve-like glyph: thin stem, two rings, one dot (5 ops)."""
    stem = frep.Rectangle(0.0, 0.02, 0.024, 0.60)
    ring1 = frep.BinaryOp("subtract_r1",
                          frep.Circle(0.0, -0.26, 0.20),
                          frep.Circle(0.0, -0.26, 0.125))
    ring2 = frep.BinaryOp("subtract_r1",
                          frep.Circle(0.0, 0.34, 0.17),
                          frep.Circle(0.0, 0.34, 0.105))
    dot = frep.Circle(0.12, -0.54, 0.05)
    return frep.union(stem, ring1, ring2, dot)


def build_disc() -> frep.FRepNode:
    return frep.Circle(0.0, 0.0, 0.6)


def build_sphere3d() -> frep.FRepNode:
    return frep.Sphere(0.0, 0.0, 0.0, 1.0)


def build_slabsphere3d() -> frep.FRepNode:
    """Sphere with slab cut-outs along x (microstructure composite)."""
    sphere = frep.Sphere(0.0, 0.0, 0.0, 1.0)
    slab = SlabComponent(axis=0, frequency=4.5, phase=0.0, threshold=0.35, dim=3)
    return frep.BinaryOp("intersect_rv", sphere, slab)


_CATALOG = {
    "star": (build_star, square(1.0), 7),
    "bat": (build_bat, square(1.0), 14),
    "robot": (build_robot, square(1.0), 39),
    "heart": (build_heart, square(1.6), 0),
    "treble-clef": (build_treble_clef, square(1.0), 5),
    "disc": (build_disc, square(1.0), 0),
    "sphere3d": (build_sphere3d, square(2.0, dim=3), 0),
    "slabsphere3d": (build_slabsphere3d, square(2.0, dim=3), 1),
}


def model_names():
    return sorted(_CATALOG)


def declared_op_count(name: str) -> int:
    return _CATALOG[name][2]


def model_bbox(name: str) -> BoundingBox:
    if name not in _CATALOG:
        raise KeyError(f"unknown model {name!r}")
    return _CATALOG[name][1]


def build_model(name: str) -> frep.FRepNode:
    if name not in _CATALOG:
        raise KeyError(f"unknown model {name!r}")
    return _CATALOG[name][0]()
