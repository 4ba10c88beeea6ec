"""Raw field files: magic "HFRF", version 1, little-endian.

Layout: magic (4 bytes), u32 version, u32 dim (2|3), u32 per-axis node
counts, f64 bbox min then max per axis, f64 node values in C (row-major)
order.  Round trips are byte-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FieldError
from .grid import BoundingBox, ScalarGrid

MAGIC = b"HFRF"
VERSION = 1


def write_hfrf(grid: ScalarGrid, path):
    dim = grid.dim
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, dim))
        fh.write(struct.pack(f"<{dim}I", *grid.dims))
        fh.write(struct.pack(f"<{dim}d", *grid.bbox.lo))
        fh.write(struct.pack(f"<{dim}d", *grid.bbox.hi))
        fh.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes())


def read_hfrf(path) -> ScalarGrid:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise FieldError(f"not a raw field file (magic {magic!r})")
        version, dim = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise FieldError(f"unsupported raw field version {version}")
        if dim not in (2, 3):
            raise FieldError(f"unsupported dimension {dim}")
        dims = struct.unpack(f"<{dim}I", fh.read(4 * dim))
        lo = struct.unpack(f"<{dim}d", fh.read(8 * dim))
        hi = struct.unpack(f"<{dim}d", fh.read(8 * dim))
        count = int(np.prod(dims))
        payload = fh.read(count * 8)
        if len(payload) != count * 8:
            raise FieldError("truncated raw field file")
        data = np.frombuffer(payload, dtype="<f8", count=count)
    values = data.astype(np.float64).reshape(dims)
    return ScalarGrid(dims, BoundingBox(np.array(lo), np.array(hi)), values)
