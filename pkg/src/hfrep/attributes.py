"""Heterogeneous object attributes: distance-parameterised colours,
procedural wood texture and slab microstructures.

An attribute function takes (distance value, point) and returns either a
colour triple in [0,1] or raw reals.  Partitioning is either a single
region or hard distance bands covering [0, d_max].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import frep


# ---------------------------------------------------------------------------
# Deterministic lattice value noise
# ---------------------------------------------------------------------------

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix64(x):
    # splitmix64 finaliser; deterministic across platforms
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * _M1
        x = (x ^ (x >> np.uint64(27))) * _M2
        x = x ^ (x >> np.uint64(31))
    return x


class LatticeHash:
    """Seeded hash of integer lattice points, multilinearly interpolated
    between lattice values.  Output lies in [0, 1)."""

    def __init__(self, seed=0):
        self.seed = int(seed)

    def lattice(self, ipts):
        """Hash value at integer lattice coordinates, shape (..., dim)."""
        ipts = np.asarray(ipts, dtype=np.int64)
        with np.errstate(over="ignore"):
            acc = np.full(ipts.shape[:-1], np.uint64(self.seed) * _M2 + np.uint64(1))
            for a in range(ipts.shape[-1]):
                acc = _mix64(acc ^ _mix64(ipts[..., a].astype(np.uint64)
                                          + np.uint64(0x9E3779B97F4A7C15) * np.uint64(a + 1)))
        return acc.astype(np.float64) / 2.0 ** 64

    def noise(self, pts):
        """Multilinear value noise at continuous points, in [0, 1)."""
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        base = np.floor(pts).astype(np.int64)
        t = pts - base
        dim = pts.shape[-1]
        out = np.zeros(len(pts))
        for corner in range(2 ** dim):
            offs = np.array([(corner >> a) & 1 for a in range(dim)], dtype=np.int64)
            w = np.ones(len(pts))
            for a in range(dim):
                w *= t[:, a] if offs[a] else (1.0 - t[:, a])
            out += w * self.lattice(base + offs)
        # multilinear blend of [0,1) values can reach 1 only if all corners
        # do, which the hash never emits
        return out[0] if single else out


# ---------------------------------------------------------------------------
# Microstructure slabs and procedural wood
# ---------------------------------------------------------------------------

def _check_threshold(l):
    l = np.atleast_1d(np.asarray(l, dtype=float))
    if np.any(l <= -1.0) or np.any(l >= 1.0):
        raise ValueError("slab thresholds must lie strictly inside (-1, 1)")
    return l


def slabs(pts, frequency, phase, threshold):
    """Componentwise sin(nu * p + phi) + l; each component >= 0 carves an
    infinite slab family orthogonal to one axis."""
    pts = np.asarray(pts, dtype=float)
    nu = np.asarray(frequency, dtype=float)
    phi = np.asarray(phase, dtype=float)
    l = _check_threshold(threshold)
    return np.sin(nu * pts + phi) + l


class SlabComponent(frep.FRepNode):
    """One slab family as an FRep leaf, for set-theoretic incorporation
    into geometry (intersect the object with each kept component)."""

    def __init__(self, axis, frequency, phase=0.0, threshold=0.0, dim=3):
        _check_threshold(threshold)
        if not 0 <= axis < dim:
            raise ValueError("slab axis out of range")
        self.axis = int(axis)
        self.frequency = float(frequency)
        self.phase = float(phase)
        self.threshold = float(threshold)
        self.dim = int(dim)

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float)
        x = pts[..., self.axis]
        return np.sin(self.frequency * x + self.phase) + self.threshold

    def continuity(self):
        from .grid import ContinuityClass
        return ContinuityClass.CInf

    def to_sexpr(self):
        return (f"(slab {self.axis} {self.frequency!r} {self.phase!r} "
                f"{self.threshold!r} {self.dim})")


def slab_composite(geometry: frep.FRepNode, components) -> frep.FRepNode:
    """Intersect a geometry tree with each slab component's >= 0 region
    using the C1 set operations."""
    out = geometry
    for comp in components:
        out = frep.BinaryOp("intersect_rv", out, comp)
    return out


def wood(pts, distance, c=3.0, base_frequency=1.0, seed=0, hash_fn=None):
    """Procedural wood value in [0, 1): fractional part of c * noise(p * nu),
    with the frequency nu driven by the distance value."""
    if c <= 1.0:
        raise ValueError("wood constant c must exceed 1")
    pts = np.asarray(pts, dtype=float)
    nu = base_frequency * np.asarray(distance, dtype=float)
    h = hash_fn if hash_fn is not None else LatticeHash(seed).noise
    g = h(pts * np.expand_dims(nu, -1) if pts.ndim > 1 else pts * nu) * c
    return g - np.floor(g)


# ---------------------------------------------------------------------------
# Attribute functions, partitions, heterogeneous objects
# ---------------------------------------------------------------------------

@dataclass
class AttributeFn:
    """One attribute: 'constant_color', 'wood' or 'slabs' with its parameters."""

    kind: str
    color: tuple = (1.0, 1.0, 1.0)
    color2: tuple = (0.0, 0.0, 0.0)
    c: float = 3.0
    base_frequency: float = 8.0
    seed: int = 0
    frequency: np.ndarray = None
    phase: np.ndarray = None
    threshold: np.ndarray = None

    def __post_init__(self):
        if self.kind not in ("constant_color", "wood", "slabs"):
            raise ValueError(f"unknown attribute kind {self.kind!r}")
        if self.kind == "constant_color":
            col = np.asarray(self.color, dtype=float)
            if col.shape != (3,) or col.min() < 0 or col.max() > 1:
                raise ValueError("colour triples must lie in [0,1]^3")
        if self.kind == "wood" and self.c <= 1.0:
            raise ValueError("wood constant c must exceed 1")
        if self.kind == "slabs":
            self.frequency = np.asarray(self.frequency, dtype=float)
            self.phase = np.asarray(self.phase, dtype=float)
            self.threshold = _check_threshold(self.threshold)

    def evaluate(self, distance, pts):
        """Attribute value(s) at points given their field value."""
        if self.kind == "constant_color":
            col = np.asarray(self.color, dtype=float)
            return np.broadcast_to(col, np.shape(distance) + (3,)).copy()
        if self.kind == "wood":
            w = wood(pts, distance, c=self.c, base_frequency=self.base_frequency,
                     seed=self.seed)
            c0 = np.asarray(self.color, dtype=float)
            c1 = np.asarray(self.color2, dtype=float)
            return c0 + np.expand_dims(w, -1) * (c1 - c0)
        return slabs(pts, self.frequency, self.phase, self.threshold)


@dataclass
class PartitionScheme:
    """Single partition, or hard distance bands (lo, hi, attribute index)
    covering [0, d_max] without overlap."""

    bands: list = None  # None -> single partition using attribute 0

    def validate(self, n_attrs, d_max):
        if self.bands is None:
            if n_attrs < 1:
                raise ValueError("single partition needs one attribute")
            return
        bands = sorted(self.bands)
        lo0 = bands[0][0]
        if lo0 > 0.0:
            raise ValueError("bands must start at distance 0")
        for (alo, ahi, ai), (blo, bhi, bi) in zip(bands, bands[1:]):
            if ahi > blo + 1e-12:
                raise ValueError("bands overlap")
            if bhi <= blo:
                raise ValueError("empty band")
            if abs(ahi - blo) > 1e-9:
                raise ValueError("bands leave a gap")
        if bands[-1][1] < d_max - 1e-12:
            raise ValueError("bands do not cover up to the maximum distance")
        for _, _, idx in bands:
            if not 0 <= idx < n_attrs:
                raise ValueError("band references a missing attribute")

    def select(self, distance):
        """Attribute index per distance value (vectorised)."""
        d = np.asarray(distance, dtype=float)
        if self.bands is None:
            return np.zeros(d.shape, dtype=np.int64)
        idx = np.full(d.shape, -1, dtype=np.int64)
        for lo, hi, ai in self.bands:
            sel = (d >= lo) & (d < hi)
            idx[sel] = ai
        # top band owns its upper edge
        lo, hi, ai = max(self.bands)
        idx[d >= hi] = ai
        return idx


@dataclass
class HeterogeneousObject:
    """Geometry field plus distance-parameterised attributes over partitions."""

    geometry: object                      # anything with .eval(pts) and .bbox
    attributes: list
    partitions: PartitionScheme = field(default_factory=PartitionScheme)
    exterior_color: tuple = (0.08, 0.08, 0.16)

    def evaluate(self, pts):
        """(distance, attribute index, rgb) at each point; exterior points
        get index -1 and the designated exterior colour."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = self.geometry.eval(pts)
        idx = self.partitions.select(d)
        idx[d < 0] = -1
        rgb = np.broadcast_to(np.asarray(self.exterior_color, dtype=float),
                              (len(pts), 3)).copy()
        for ai in np.unique(idx):
            if ai < 0:
                continue
            sel = idx == ai
            val = self.attributes[ai].evaluate(d[sel], pts[sel])
            if val.shape[-1] == 3:
                rgb[sel] = np.clip(val, 0.0, 1.0)
            else:
                # raw reals (slabs): render kept region vs cut-out
                keep = np.all(val >= 0, axis=-1)
                rgb[sel] = np.where(keep[:, None],
                                    np.asarray(self.attributes[ai].color, dtype=float),
                                    np.asarray(self.exterior_color, dtype=float))
        return d, idx, rgb


def evaluate_attributes(obj: HeterogeneousObject, pts):
    """Attribute tuple(s) at points: exterior points yield the exterior colour."""
    return obj.evaluate(pts)
