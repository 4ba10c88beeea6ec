"""Unsigned distance fields via vector distance transforms.

Seeds mark the discretised zero level of a sampled defining function with
sub-cell accuracy (linear interpolation along sign-changing edges).  The
transform propagates offset vectors to the nearest recorded seed in two
raster sweeps over an 8-neighbourhood (2D) or slice-by-slice sweeps with
full lower/upper slice masks (3D).  Distances are world units.  Ties are
broken toward the lexicographically smaller offset vector, so output is
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import EmptyBoundaryError
from .grid import BoundingBox, ScalarGrid


@dataclass
class SeedSet:
    """Boundary samples: world positions plus, for edge seeds, the grid
    edge they were extracted from (base node, axis, fraction)."""

    positions: np.ndarray
    base_index: np.ndarray
    axis: np.ndarray
    t: np.ndarray
    grid_dims: tuple
    bbox: BoundingBox

    def __len__(self):
        return len(self.positions)

    @property
    def dim(self):
        return self.bbox.dim


def extract_seeds(g: ScalarGrid) -> SeedSet:
    """One seed per sign-changing grid edge, placed where the linear
    interpolant crosses zero; nodes storing exact zeros seed directly."""
    v = g.values
    h = g.spacing
    positions = []
    bases = []
    axes = []
    ts = []
    for a in range(g.dim):
        sl1 = [slice(None)] * g.dim
        sl2 = [slice(None)] * g.dim
        sl1[a] = slice(0, -1)
        sl2[a] = slice(1, None)
        v1 = v[tuple(sl1)]
        v2 = v[tuple(sl2)]
        change = (v1 * v2) < 0.0
        idx = np.argwhere(change)
        if len(idx) == 0:
            continue
        a1 = v1[change]
        a2 = v2[change]
        t = a1 / (a1 - a2)
        pos = g.grid_to_world(idx)
        pos[:, a] += t * h[a]
        positions.append(pos)
        bases.append(idx)
        axes.append(np.full(len(idx), a, dtype=np.int64))
        ts.append(t)
    zero_nodes = np.argwhere(v == 0.0)
    if len(zero_nodes):
        positions.append(g.grid_to_world(zero_nodes))
        bases.append(zero_nodes)
        axes.append(np.full(len(zero_nodes), -1, dtype=np.int64))
        ts.append(np.zeros(len(zero_nodes)))
    if not positions:
        raise EmptyBoundaryError("grid has no sign change: empty boundary")
    return SeedSet(
        positions=np.concatenate(positions, axis=0),
        base_index=np.concatenate(bases, axis=0).astype(np.int64),
        axis=np.concatenate(axes),
        t=np.concatenate(ts),
        grid_dims=g.dims,
        bbox=g.bbox,
    )


def seeds_from_points(points, dims, bbox: BoundingBox) -> SeedSet:
    """Free-standing seed set from arbitrary world positions."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) == 0:
        raise EmptyBoundaryError("empty seed set")
    dims = tuple(int(d) for d in dims)
    h = bbox.extent / (np.asarray(dims) - 1)
    cell = np.clip(np.floor((points - bbox.lo) / h).astype(np.int64),
                   0, np.asarray(dims) - 2)
    return SeedSet(points, cell, np.full(len(points), -1, dtype=np.int64),
                   np.zeros(len(points)), dims, bbox)


@dataclass
class VectorDTField:
    """Per-node offset vectors to the nearest recorded seed."""

    offsets: np.ndarray
    dims: tuple
    bbox: BoundingBox

    def udf(self) -> ScalarGrid:
        return ScalarGrid(self.dims, self.bbox,
                          np.linalg.norm(self.offsets, axis=-1))


@njit(cache=True, inline="always")
def _pull2d(off, i, j, di, dj, hx, hy):
    ni = i + di
    nj = j + dj
    if ni < 0 or ni >= off.shape[0] or nj < 0 or nj >= off.shape[1]:
        return
    cx = off[ni, nj, 0] + di * hx
    cy = off[ni, nj, 1] + dj * hy
    bx = off[i, j, 0]
    by = off[i, j, 1]
    d = cx * cx + cy * cy
    best = bx * bx + by * by
    if d < best or (d == best and (cx < bx or (cx == bx and cy < by))):
        off[i, j, 0] = cx
        off[i, j, 1] = cy


@njit(cache=True)
def _dt_sweep2d(off, hx, hy, forward):
    # per-row interleaved scans: the return sub-scan must run before the
    # next row is visited, or diagonal information arrives one row late
    nx, ny = off.shape[0], off.shape[1]
    if forward:
        for j in range(ny):
            for i in range(nx):
                _pull2d(off, i, j, -1, 0, hx, hy)
                _pull2d(off, i, j, -1, -1, hx, hy)
                _pull2d(off, i, j, 0, -1, hx, hy)
                _pull2d(off, i, j, 1, -1, hx, hy)
            for i in range(nx - 1, -1, -1):
                _pull2d(off, i, j, 1, 0, hx, hy)
    else:
        for j in range(ny - 1, -1, -1):
            for i in range(nx - 1, -1, -1):
                _pull2d(off, i, j, 1, 0, hx, hy)
                _pull2d(off, i, j, 1, 1, hx, hy)
                _pull2d(off, i, j, 0, 1, hx, hy)
                _pull2d(off, i, j, -1, 1, hx, hy)
            for i in range(nx):
                _pull2d(off, i, j, -1, 0, hx, hy)


@njit(cache=True, inline="always")
def _pull3d(off, i, j, k, di, dj, dk, hx, hy, hz):
    ni = i + di
    nj = j + dj
    nk = k + dk
    if (ni < 0 or ni >= off.shape[0] or nj < 0 or nj >= off.shape[1]
            or nk < 0 or nk >= off.shape[2]):
        return
    cx = off[ni, nj, nk, 0] + di * hx
    cy = off[ni, nj, nk, 1] + dj * hy
    cz = off[ni, nj, nk, 2] + dk * hz
    bx = off[i, j, k, 0]
    by = off[i, j, k, 1]
    bz = off[i, j, k, 2]
    d = cx * cx + cy * cy + cz * cz
    best = bx * bx + by * by + bz * bz
    if d < best or (d == best and
                    (cx < bx or (cx == bx and (cy < by or (cy == by and cz < bz))))):
        off[i, j, k, 0] = cx
        off[i, j, k, 1] = cy
        off[i, j, k, 2] = cz


@njit(cache=True)
def _dt_sweep_slice3d(off, k, hx, hy, hz, dk, forward):
    """In-slice interleaved sweep; every scan also pulls through the
    9-neighbour mask of the previously processed slice (k + dk)."""
    nx, ny = off.shape[0], off.shape[1]
    if forward:
        for j in range(ny):
            for i in range(nx):
                if dk != 0:
                    for dj in (-1, 0, 1):
                        for di in (-1, 0, 1):
                            _pull3d(off, i, j, k, di, dj, dk, hx, hy, hz)
                _pull3d(off, i, j, k, -1, 0, 0, hx, hy, hz)
                _pull3d(off, i, j, k, -1, -1, 0, hx, hy, hz)
                _pull3d(off, i, j, k, 0, -1, 0, hx, hy, hz)
                _pull3d(off, i, j, k, 1, -1, 0, hx, hy, hz)
            for i in range(nx - 1, -1, -1):
                _pull3d(off, i, j, k, 1, 0, 0, hx, hy, hz)
    else:
        for j in range(ny - 1, -1, -1):
            for i in range(nx - 1, -1, -1):
                if dk != 0:
                    for dj in (-1, 0, 1):
                        for di in (-1, 0, 1):
                            _pull3d(off, i, j, k, di, dj, dk, hx, hy, hz)
                _pull3d(off, i, j, k, 1, 0, 0, hx, hy, hz)
                _pull3d(off, i, j, k, 1, 1, 0, hx, hy, hz)
                _pull3d(off, i, j, k, 0, 1, 0, hx, hy, hz)
                _pull3d(off, i, j, k, -1, 1, 0, hx, hy, hz)
            for i in range(nx):
                _pull3d(off, i, j, k, -1, 0, 0, hx, hy, hz)


@njit(cache=True)
def _dt_pass3d(off, hx, hy, hz, kdir):
    nz = off.shape[2]
    k0, k1 = (0, nz) if kdir > 0 else (nz - 1, -1)
    for k in range(k0, k1, kdir):
        _dt_sweep_slice3d(off, k, hx, hy, hz, -kdir, True)
        _dt_sweep_slice3d(off, k, hx, hy, hz, -kdir, False)


def _init_offsets(seeds: SeedSet, dims, bbox):
    dim = bbox.dim
    h = bbox.extent / (np.asarray(dims) - 1)
    big = 10.0 * bbox.diagonal()
    off = np.full(tuple(dims) + (dim,), big)
    cell = np.clip(np.floor((seeds.positions - bbox.lo) / h).astype(np.int64),
                   0, np.asarray(dims) - 2)
    corners = np.array([[(c >> a) & 1 for a in range(dim)] for c in range(2 ** dim)],
                       dtype=np.int64)
    node = cell[:, None, :] + corners[None, :, :]          # (S, 2^dim, dim)
    cand = seeds.positions[:, None, :] - (bbox.lo + node * h)
    node = node.reshape(-1, dim)
    cand = cand.reshape(-1, dim)
    # keep the best candidate per node: sort by (norm^2, lexicographic offset)
    keys = [cand[:, a] for a in range(dim - 1, -1, -1)]
    keys.append(np.einsum("ij,ij->i", cand, cand))
    order = np.lexsort(tuple(keys))
    node = node[order]
    cand = cand[order]
    flat = np.ravel_multi_index(tuple(node.T), dims)
    first = np.unique(flat, return_index=True)[1]
    off.reshape(-1, dim)[flat[first]] = cand[first]
    return off


def vector_dt(seeds: SeedSet, dims=None, bbox: BoundingBox = None) -> VectorDTField:
    """Propagate nearest-seed offset vectors across the grid."""
    if len(seeds) == 0:
        raise EmptyBoundaryError("empty seed set")
    dims = tuple(int(d) for d in (dims if dims is not None else seeds.grid_dims))
    bbox = bbox if bbox is not None else seeds.bbox
    h = bbox.extent / (np.asarray(dims) - 1)
    off = _init_offsets(seeds, dims, bbox)
    if bbox.dim == 2:
        _dt_sweep2d(off, h[0], h[1], True)
        _dt_sweep2d(off, h[0], h[1], False)
    else:
        _dt_pass3d(off, h[0], h[1], h[2], 1)
        _dt_pass3d(off, h[0], h[1], h[2], -1)
    return VectorDTField(off, dims, bbox)


def udf_from_frep_grid(g: ScalarGrid) -> ScalarGrid:
    """Convenience: seeds from a sampled defining function, then vector DT."""
    return vector_dt(extract_seeds(g)).udf()
