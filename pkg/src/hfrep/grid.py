"""Shared geometric substrate: bounding boxes, node-centred scalar grids,
multilinear sampling and finite-difference gradients.

Grids are node-centred: values live at lattice points, spacing is
(max - min) / (dims - 1) per axis.  All values are float64.  2D and 3D
are supported uniformly; axis 0 is x.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


class ContinuityClass(enum.IntEnum):
    """Smoothness classes tracked through constructive trees (C0 < C1 < CInf)."""

    C0 = 0
    C1 = 1
    CInf = 2


@dataclass(frozen=True)
class BoundingBox:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size not in (2, 3):
            raise ValueError("bounding box needs matching 2- or 3-vectors")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("bounding box corners must be finite")
        if not np.all(lo < hi):
            raise ValueError("bounding box min must be < max componentwise")

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def extent(self) -> np.ndarray:
        return self.hi - self.lo

    def diagonal(self) -> float:
        return float(np.linalg.norm(self.extent))

    def contains(self, pts, eps=1e-12):
        pts = np.asarray(pts, dtype=float)
        slack = eps * np.maximum(np.abs(self.lo), np.abs(self.hi)) + eps
        return np.all((pts >= self.lo - slack) & (pts <= self.hi + slack), axis=-1)

    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)


def square(half: float, dim: int = 2) -> BoundingBox:
    """Symmetric box [-half, half]^dim."""
    return BoundingBox(np.full(dim, -half), np.full(dim, half))


@dataclass
class ScalarGrid:
    """Uniform sampled real field over a bounding box.

    values has shape == dims, index [i, j(, k)] maps to world point
    lo + (i, j, k) * spacing.
    """

    dims: tuple
    bbox: BoundingBox
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.dims) != self.bbox.dim:
            raise ValueError("dims rank must match bbox dimension")
        if any(d < 2 for d in self.dims):
            raise ValueError("need at least 2 nodes per axis")
        if self.values is None:
            self.values = np.zeros(self.dims)
        else:
            self.values = np.asarray(self.values, dtype=float)
            if self.values.shape != self.dims:
                raise ValueError(f"values shape {self.values.shape} != dims {self.dims}")

    @property
    def dim(self) -> int:
        return len(self.dims)

    @property
    def spacing(self) -> np.ndarray:
        return self.bbox.extent / (np.asarray(self.dims) - 1)

    def axes(self):
        return [np.linspace(self.bbox.lo[a], self.bbox.hi[a], self.dims[a])
                for a in range(self.dim)]

    def node_coords(self) -> np.ndarray:
        """World coordinates of every node, shape dims + (dim,)."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def world_to_grid(self, pts):
        """Fractional index vector for world points (affine, no clamping)."""
        pts = np.asarray(pts, dtype=float)
        return (pts - self.bbox.lo) / self.spacing

    def grid_to_world(self, idx):
        idx = np.asarray(idx, dtype=float)
        return self.bbox.lo + idx * self.spacing

    def sample(self, pts):
        """Multilinear (bi/trilinear) interpolation; exact at nodes.

        Raises DomainError for points outside the bounding box.
        """
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if not np.all(self.bbox.contains(pts)):
            raise DomainError("sample point outside grid bounding box")
        fi = self.world_to_grid(pts)
        cell = np.clip(np.floor(fi).astype(np.int64), 0, np.asarray(self.dims) - 2)
        t = fi - cell
        out = np.zeros(len(pts))
        for corner in range(2 ** self.dim):
            offs = [(corner >> a) & 1 for a in range(self.dim)]
            w = np.ones(len(pts))
            for a, o in enumerate(offs):
                w *= t[:, a] if o else (1.0 - t[:, a])
            idx = tuple(cell[:, a] + offs[a] for a in range(self.dim))
            out += w * self.values[idx]
        return out[0] if single else out

    def gradient(self, index):
        """Central-difference gradient at a node, one-sided on borders."""
        index = tuple(int(i) for i in index)
        h = self.spacing
        g = np.zeros(self.dim)
        for a in range(self.dim):
            i = index[a]
            lo = list(index)
            hi = list(index)
            if 0 < i < self.dims[a] - 1:
                lo[a] = i - 1
                hi[a] = i + 1
                g[a] = (self.values[tuple(hi)] - self.values[tuple(lo)]) / (2 * h[a])
            elif i == 0:
                hi[a] = 1
                g[a] = (self.values[tuple(hi)] - self.values[tuple(index)]) / h[a]
            else:
                lo[a] = i - 1
                g[a] = (self.values[tuple(index)] - self.values[tuple(lo)]) / h[a]
        return g

    def copy_with(self, values) -> "ScalarGrid":
        return ScalarGrid(self.dims, self.bbox, np.array(values, dtype=float))
