"""Function representation: analytic primitives and constructive trees.

A defining function is positive inside the object, zero on its boundary
and negative outside.  Set-theoretic operations come in three flavours:

* ``union_r1`` / ``intersect_r1`` / ``subtract_r1`` -- the classic
  f1 + f2 +/- sqrt(f1^2 + f2^2) pair.  Cheap, but only C0 overall: the
  gradient is undefined where both arguments vanish.
* ``union_rv`` / ``intersect_rv`` -- the piecewise C^(n-1) system (even
  n, default 2), whose branch seams join with matching derivatives.
* ``union_max`` / ``intersect_min`` -- exact min/max, distance preserving
  but C0.

Primitive defining functions use algebraic (non-distance) forms on
purpose, e.g. a circle is r^2 - |p - c|^2; the field isolines of a
constructive model therefore do not follow the shape, which is exactly
what the distance-field stages downstream are for.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from .grid import BoundingBox, ContinuityClass, ScalarGrid


# ---------------------------------------------------------------------------
# R-function systems
# ---------------------------------------------------------------------------

def r_union(f1, f2):
    """C0 union: f1 + f2 + sqrt(f1^2 + f2^2); sign-equivalent to max."""
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    return f1 + f2 + np.sqrt(f1 * f1 + f2 * f2)


def r_intersect(f1, f2):
    """C0 intersection: f1 + f2 - sqrt(f1^2 + f2^2); sign-equivalent to min."""
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    return f1 + f2 - np.sqrt(f1 * f1 + f2 * f2)


def _check_rv_order(n):
    if n < 2 or n % 2 != 0:
        raise ValueError("rv operations need an even order n >= 2")


def rv_union(f1, f2, n=2):
    """Piecewise C^(n-1) union, sign-equivalent to max(f1, f2).

    Branches (even n):
      both > 0:  (f1^n + f2^n)^(1/n)
      f1 <= 0 <= f2:  f2
      f2 <= 0 <= f1:  f1
      both < 0:  (-1)^(n+1) f1 f2 (f1^n + f2^n)^(-1/n)
    """
    _check_rv_order(n)
    scalar = np.isscalar(f1) and np.isscalar(f2)
    f1, f2 = np.broadcast_arrays(np.atleast_1d(np.asarray(f1, dtype=float)),
                                 np.atleast_1d(np.asarray(f2, dtype=float)))
    out = np.empty(f1.shape)
    both_pos = (f1 > 0) & (f2 > 0)
    both_neg = (f1 < 0) & (f2 < 0)
    m2 = (f1 <= 0) & (f2 >= 0)
    m3 = (f1 >= 0) & (f2 <= 0)
    out[m2] = f2[m2]
    out[m3] = f1[m3]
    a, b = f1[both_pos], f2[both_pos]
    out[both_pos] = (a ** n + b ** n) ** (1.0 / n)
    a, b = f1[both_neg], f2[both_neg]
    out[both_neg] = (-1.0) ** (n + 1) * a * b * (a ** n + b ** n) ** (-1.0 / n)
    return float(out[0]) if scalar else out


def rv_intersect(f1, f2, n=2):
    """Piecewise C^(n-1) intersection, sign-equivalent to min(f1, f2).

    Branches (even n):
      both > 0:  f1 f2 (f1^n + f2^n)^(-1/n)
      f1 <= 0 <= f2:  f1
      f2 <= 0 <= f1:  f2
      both < 0:  (-1)^(n+1) (f1^n + f2^n)^(1/n)
    """
    _check_rv_order(n)
    scalar = np.isscalar(f1) and np.isscalar(f2)
    f1, f2 = np.broadcast_arrays(np.atleast_1d(np.asarray(f1, dtype=float)),
                                 np.atleast_1d(np.asarray(f2, dtype=float)))
    out = np.empty(f1.shape)
    both_pos = (f1 > 0) & (f2 > 0)
    both_neg = (f1 < 0) & (f2 < 0)
    m2 = (f1 <= 0) & (f2 >= 0)
    m3 = (f1 >= 0) & (f2 <= 0)
    out[m2] = f1[m2]
    out[m3] = f2[m3]
    a, b = f1[both_pos], f2[both_pos]
    out[both_pos] = a * b * (a ** n + b ** n) ** (-1.0 / n)
    a, b = f1[both_neg], f2[both_neg]
    out[both_neg] = (-1.0) ** (n + 1) * (a ** n + b ** n) ** (1.0 / n)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Constructive tree nodes
# ---------------------------------------------------------------------------

class FRepNode(ABC):
    """A node of a constructive tree.  Immutable after construction."""

    dim: int

    @abstractmethod
    def eval(self, pts):
        """Defining function at points of shape (..., dim)."""

    @abstractmethod
    def continuity(self) -> ContinuityClass:
        """Minimum continuity class over the subtree."""

    @abstractmethod
    def to_sexpr(self) -> str:
        """Serialise the subtree as an s-expression."""

    def __call__(self, pts):
        return self.eval(pts)


def _fmt(x):
    return repr(float(x))


class Primitive(FRepNode):
    kind = ""

    def continuity(self):
        return ContinuityClass.CInf


class Circle(Primitive):
    kind = "circle"
    dim = 2

    def __init__(self, cx, cy, r):
        if r <= 0:
            raise ValueError("circle radius must be positive")
        self.center = np.array([cx, cy], dtype=float)
        self.r = float(r)

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float)
        d = pts - self.center
        return self.r ** 2 - np.sum(d * d, axis=-1)

    def to_sexpr(self):
        return f"(circle {_fmt(self.center[0])} {_fmt(self.center[1])} {_fmt(self.r)})"


class Sphere(Primitive):
    kind = "sphere"
    dim = 3

    def __init__(self, cx, cy, cz, r):
        if r <= 0:
            raise ValueError("sphere radius must be positive")
        self.center = np.array([cx, cy, cz], dtype=float)
        self.r = float(r)

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float)
        d = pts - self.center
        return self.r ** 2 - np.sum(d * d, axis=-1)

    def to_sexpr(self):
        c = self.center
        return f"(sphere {_fmt(c[0])} {_fmt(c[1])} {_fmt(c[2])} {_fmt(self.r)})"


class Rectangle(Primitive):
    """Axis-aligned rectangle; min of the four inward half-plane distances (C0)."""

    kind = "rect"
    dim = 2

    def __init__(self, cx, cy, hx, hy):
        if hx <= 0 or hy <= 0:
            raise ValueError("rectangle half-extents must be positive")
        self.center = np.array([cx, cy], dtype=float)
        self.half = np.array([hx, hy], dtype=float)

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float)
        d = self.half - np.abs(pts - self.center)
        return np.min(d, axis=-1)

    def continuity(self):
        return ContinuityClass.C0

    def to_sexpr(self):
        c, h = self.center, self.half
        return f"(rect {_fmt(c[0])} {_fmt(c[1])} {_fmt(h[0])} {_fmt(h[1])})"


class Box(Primitive):
    kind = "box"
    dim = 3

    def __init__(self, cx, cy, cz, hx, hy, hz):
        if hx <= 0 or hy <= 0 or hz <= 0:
            raise ValueError("box half-extents must be positive")
        self.center = np.array([cx, cy, cz], dtype=float)
        self.half = np.array([hx, hy, hz], dtype=float)

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float)
        d = self.half - np.abs(pts - self.center)
        return np.min(d, axis=-1)

    def continuity(self):
        return ContinuityClass.C0

    def to_sexpr(self):
        c, h = self.center, self.half
        return ("(box " + " ".join(_fmt(v) for v in (*c, *h)) + ")")


class Triangle2D(Primitive):
    """Triangle as min of three inward edge distances.  Vertices are
    re-ordered counter-clockwise on construction."""

    kind = "tri"
    dim = 2

    def __init__(self, v0, v1, v2):
        v = np.array([v0, v1, v2], dtype=float)
        if v.shape != (3, 2):
            raise ValueError("triangle needs three 2D vertices")
        e1 = v[1] - v[0]
        e2 = v[2] - v[0]
        area2 = e1[0] * e2[1] - e1[1] * e2[0]
        if abs(area2) < 1e-15:
            raise ValueError("degenerate triangle")
        if area2 < 0:
            v = v[::-1]
        self.verts = v
        # inward unit normals per edge
        e = np.roll(v, -1, axis=0) - v
        n = np.stack([-e[:, 1], e[:, 0]], axis=-1)
        self._normals = n / np.linalg.norm(n, axis=-1, keepdims=True)

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float)
        d = np.stack(
            [np.sum((pts - self.verts[i]) * self._normals[i], axis=-1) for i in range(3)],
            axis=-1,
        )
        return np.min(d, axis=-1)

    def continuity(self):
        return ContinuityClass.C0

    def to_sexpr(self):
        flat = " ".join(_fmt(v) for v in self.verts.ravel())
        return f"(tri {flat})"


class Heart2D(Primitive):
    """Classic analytic heart curve, positive inside."""

    kind = "heart"
    dim = 2

    def __init__(self, scale=1.0):
        if scale <= 0:
            raise ValueError("heart scale must be positive")
        self.scale = float(scale)

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float) / self.scale
        x = pts[..., 0]
        y = pts[..., 1]
        q = x * x + y * y - 1.0
        return -(q * q * q - x * x * y * y * y)

    def to_sexpr(self):
        return f"(heart {_fmt(self.scale)})"


class Transform(FRepNode):
    """Rigid motion (+ optional uniform scale) applied to a child tree.

    eval(p) = child(R^-1 (p - t) / s): the stored parameters describe the
    forward placement of the child.
    """

    def __init__(self, child: FRepNode, translate=None, rotate=0.0, scale=1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.child = child
        self.dim = child.dim
        self.translate = np.zeros(self.dim) if translate is None else np.asarray(translate, dtype=float)
        self.rotate = float(rotate)  # radians, about z / in-plane
        self.scale = float(scale)
        c, s = math.cos(-self.rotate), math.sin(-self.rotate)
        if self.dim == 2:
            self._inv_rot = np.array([[c, -s], [s, c]])
        else:
            self._inv_rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float)
        local = (pts - self.translate) @ self._inv_rot.T / self.scale
        return self.child.eval(local)

    def continuity(self):
        return self.child.continuity()

    def to_sexpr(self):
        t = " ".join(_fmt(v) for v in self.translate)
        return (f"(xform {t} {_fmt(self.rotate)} {_fmt(self.scale)} "
                f"{self.child.to_sexpr()})")


_BINARY_OPS = {
    "union_r1": lambda a, b, n: r_union(a, b),
    "intersect_r1": lambda a, b, n: r_intersect(a, b),
    "subtract_r1": lambda a, b, n: r_intersect(a, -np.asarray(b)),
    "union_rv": rv_union,
    "intersect_rv": rv_intersect,
    "union_max": lambda a, b, n: np.maximum(a, b),
    "intersect_min": lambda a, b, n: np.minimum(a, b),
}

_OP_CONTINUITY = {
    "union_r1": ContinuityClass.C0,
    "intersect_r1": ContinuityClass.C0,
    "subtract_r1": ContinuityClass.C0,
    "union_max": ContinuityClass.C0,
    "intersect_min": ContinuityClass.C0,
    # C^(n-1) with the default n=2; the enum has no classes between C1
    # and CInf, so higher even orders also report C1.
    "union_rv": ContinuityClass.C1,
    "intersect_rv": ContinuityClass.C1,
}


class BinaryOp(FRepNode):
    def __init__(self, kind: str, left: FRepNode, right: FRepNode, n: int = 2):
        if kind not in _BINARY_OPS:
            raise ValueError(f"unknown set operation {kind!r}")
        if left.dim != right.dim:
            raise ValueError("operands of mixed dimension")
        if kind in ("union_rv", "intersect_rv"):
            _check_rv_order(n)
        self.kind = kind
        self.left = left
        self.right = right
        self.n = int(n)
        self.dim = left.dim

    def eval(self, pts):
        return _BINARY_OPS[self.kind](self.left.eval(pts), self.right.eval(pts), self.n)

    def continuity(self):
        cls = min(self.left.continuity(), self.right.continuity())
        return min(cls, _OP_CONTINUITY[self.kind])

    def to_sexpr(self):
        head = self.kind
        if self.kind in ("union_rv", "intersect_rv"):
            head = f"{self.kind} {self.n}"
        return f"({head} {self.left.to_sexpr()} {self.right.to_sexpr()})"


def union(*nodes, kind="union_r1", n=2):
    """Left fold of a union over several subtrees."""
    if not nodes:
        raise ValueError("union of nothing")
    out = nodes[0]
    for nxt in nodes[1:]:
        out = BinaryOp(kind, out, nxt, n=n)
    return out


def count_ops(tree: FRepNode) -> int:
    """Number of set-theoretic operations in a constructive tree."""
    if isinstance(tree, BinaryOp):
        return 1 + count_ops(tree.left) + count_ops(tree.right)
    if isinstance(tree, Transform):
        return count_ops(tree.child)
    return 0


def eval_frep(tree: FRepNode, pts):
    """Evaluate a constructive tree; sign classifies point membership."""
    return tree.eval(pts)


def continuity_class(tree: FRepNode) -> ContinuityClass:
    return tree.continuity()


def sample_frep(tree: FRepNode, dims, bbox: BoundingBox) -> ScalarGrid:
    """Sample the defining function on a node-centred grid."""
    g = ScalarGrid(dims, bbox)
    pts = g.node_coords().reshape(-1, bbox.dim)
    g.values = tree.eval(pts).reshape(g.dims)
    return g


# ---------------------------------------------------------------------------
# S-expression round trip
# ---------------------------------------------------------------------------

def _tokenise(text):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_tokens(tokens, pos):
    if tokens[pos] != "(":
        raise ValueError("expected '('")
    pos += 1
    head = tokens[pos]
    pos += 1
    args = []
    while tokens[pos] != ")":
        if tokens[pos] == "(":
            node, pos = _parse_tokens(tokens, pos)
            args.append(node)
        else:
            args.append(float(tokens[pos]))
            pos += 1
    pos += 1
    return _build_node(head, args), pos


def _build_node(head, args):
    if head == "circle":
        return Circle(*args)
    if head == "sphere":
        return Sphere(*args)
    if head == "rect":
        return Rectangle(*args)
    if head == "box":
        return Box(*args)
    if head == "tri":
        return Triangle2D(args[0:2], args[2:4], args[4:6])
    if head == "heart":
        return Heart2D(*args)
    if head == "xform":
        child = args[-1]
        nums = args[:-1]
        if len(nums) == 4:  # 2D: tx ty rot scale
            return Transform(child, translate=nums[0:2], rotate=nums[2], scale=nums[3])
        return Transform(child, translate=nums[0:3], rotate=nums[3], scale=nums[4])
    if head in ("union_rv", "intersect_rv"):
        return BinaryOp(head, args[1], args[2], n=int(args[0]))
    if head in _BINARY_OPS:
        return BinaryOp(head, args[0], args[1])
    if head == "slab":
        from .attributes import SlabComponent
        return SlabComponent(axis=int(args[0]), frequency=args[1], phase=args[2],
                             threshold=args[3], dim=int(args[4]))
    raise ValueError(f"unknown s-expression head {head!r}")


def parse_sexpr(text: str) -> FRepNode:
    tokens = _tokenise(text)
    node, pos = _parse_tokens(tokens, 0)
    if pos != len(tokens):
        raise ValueError("trailing tokens after s-expression")
    return node
