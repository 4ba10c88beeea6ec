"""Field assembly: smooth the discrete unsigned distance field with an
interpolating Catmull-Rom spline, restore the sign with a sigmoid step of
the defining function, and package the result as an evaluable field.

The product form

    field(p) = step(f_frep(p) / s_l) * smooth_udf(p)

keeps the zero set pinned to the defining function's zero set (the step
is odd and strictly increasing), stays below the unsigned distance in
magnitude, and inherits C1 continuity wherever the defining function has
it.  The slope s_l defaults to 1e-4 of the bounding-box diagonal.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import adf as adf_mod
from . import dt as dt_mod
from . import eikonal as eik_mod
from . import idf as idf_mod
from .errors import DomainError
from .frep import FRepNode, sample_frep
from .grid import BoundingBox, ScalarGrid

ROUTES = ("dt", "fim", "hfim-adf", "idf")


# ---------------------------------------------------------------------------
# Catmull-Rom smoothing spline
# ---------------------------------------------------------------------------

def _cr_weights(t):
    t = np.asarray(t, dtype=float)
    t2 = t * t
    t3 = t2 * t
    return np.stack([
        -0.5 * t3 + t2 - 0.5 * t,
        1.5 * t3 - 2.5 * t2 + 1.0,
        -1.5 * t3 + 2.0 * t2 + 0.5 * t,
        0.5 * t3 - 0.5 * t2,
    ], axis=-1)


def _cr_dweights(t):
    t = np.asarray(t, dtype=float)
    t2 = t * t
    return np.stack([
        -1.5 * t2 + 2.0 * t - 0.5,
        4.5 * t2 - 5.0 * t,
        -4.5 * t2 + 4.0 * t + 0.5,
        1.5 * t2 - t,
    ], axis=-1)


def _pad_linear(values):
    """One-node linear-extrapolation pad per side: keeps the spline's
    linear precision up to the domain border."""
    dim = values.ndim
    padded = np.pad(values, 1, mode="edge")
    for a in range(dim):
        lo0 = [slice(None)] * dim
        lo1 = [slice(None)] * dim
        lo2 = [slice(None)] * dim
        lo0[a], lo1[a], lo2[a] = 0, 1, 2
        padded[tuple(lo0)] = 2 * padded[tuple(lo1)] - padded[tuple(lo2)]
        hi0 = [slice(None)] * dim
        hi1 = [slice(None)] * dim
        hi2 = [slice(None)] * dim
        hi0[a], hi1[a], hi2[a] = -1, -2, -3
        padded[tuple(hi0)] = 2 * padded[tuple(hi1)] - padded[tuple(hi2)]
    return padded


class SmoothUDF:
    """Interpolating bi/tricubic Catmull-Rom spline over an unsigned
    distance grid: reproduces node values, C1 inside the box.

    Construction requires non-negative node values.  With validate=True
    the no-new-zeros condition is monitored: the spline minimum over a
    dense per-cell sampling is stored as `zero_margin` and a warning is
    emitted when it drops below -1e-6 * max(values).  Shapes with sharp
    boundary creases legitimately undershoot by a fraction of a cell, so
    this is diagnostics, not an error.
    """

    def __init__(self, source: ScalarGrid, validate=True, samples_per_cell=None):
        if np.any(source.values < 0):
            raise ValueError("smoothing input must be non-negative at all nodes")
        self.source = source
        self.bbox = source.bbox
        self.dims = source.dims
        self._padded = _pad_linear(source.values)
        self.zero_margin = None
        if validate:
            if samples_per_cell is None:
                samples_per_cell = 4 if len(self.dims) == 2 else 2
            self.zero_margin = self.min_over_cells(samples_per_cell)
            floor = -1e-6 * float(source.values.max())
            if self.zero_margin < floor:
                warnings.warn(
                    f"smoothing undershoots zero: min {self.zero_margin:.3e} "
                    f"< {floor:.3e} (sharp boundary creases)", RuntimeWarning)

    @property
    def dim(self):
        return len(self.dims)

    def _gather(self, pts, weight_fns):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if not np.all(self.bbox.contains(pts)):
            raise DomainError("sample point outside the field's bounding box")
        h = self.source.spacing
        fi = (pts - self.bbox.lo) / h
        cell = np.clip(np.floor(fi).astype(np.int64), 0, np.asarray(self.dims) - 2)
        t = fi - cell
        w = [fn(t[:, a]) for a, fn in enumerate(weight_fns)]
        vals = np.zeros(len(pts))
        if self.dim == 2:
            for a in range(4):
                row = np.zeros(len(pts))
                ia = cell[:, 0] + a
                for b in range(4):
                    row += w[1][:, b] * self._padded[ia, cell[:, 1] + b]
                vals += w[0][:, a] * row
        else:
            for a in range(4):
                plane = np.zeros(len(pts))
                ia = cell[:, 0] + a
                for b in range(4):
                    row = np.zeros(len(pts))
                    ib = cell[:, 1] + b
                    for c in range(4):
                        row += w[2][:, c] * self._padded[ia, ib, cell[:, 2] + c]
                    plane += w[1][:, b] * row
                vals += w[0][:, a] * plane
        return vals

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        out = self._gather(pts, [_cr_weights] * self.dim)
        return out[0] if single else out

    def gradient(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        h = self.source.spacing
        cols = []
        for a in range(self.dim):
            fns = [_cr_weights] * self.dim
            fns[a] = _cr_dweights
            cols.append(self._gather(pts, fns) / h[a])
        return np.stack(cols, axis=-1)

    def _axis_weight_matrix(self, axis, samples_per_cell):
        """Dense (q, n+2) Catmull-Rom weights for a per-cell sampling of
        one axis, against the padded value array."""
        n = self.dims[axis]
        base = np.repeat(np.arange(n - 1), samples_per_cell)
        offs = np.tile(np.linspace(0.0, 1.0, samples_per_cell, endpoint=False), n - 1)
        base = np.concatenate([base, [n - 2]])
        offs = np.concatenate([offs, [1.0]])
        w = _cr_weights(offs)
        mat = np.zeros((len(base), n + 2))
        for k in range(4):
            mat[np.arange(len(base)), base + k] = w[:, k]
        return mat

    def min_over_cells(self, samples_per_cell=4):
        """Minimum of the spline over a dense per-cell sampling lattice
        (separable tensor evaluation, cheap even in 3D)."""
        mats = [self._axis_weight_matrix(a, samples_per_cell) for a in range(self.dim)]
        acc = self._padded
        for a, mat in enumerate(mats):
            acc = np.moveaxis(np.tensordot(mat, np.moveaxis(acc, a, 0), axes=(1, 0)), 0, a)
        return float(acc.min())


# ---------------------------------------------------------------------------
# Sigmoid step
# ---------------------------------------------------------------------------

def sigmoid_step(x, s_l, r=2.0):
    """r / (1 + exp(-2 x / s_l)) - r/2: odd, strictly increasing, range
    (-r/2, r/2); equals tanh(x / s_l) for r=2."""
    if s_l <= 0:
        raise ValueError("slope s_l must be positive")
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = r / (1.0 + np.exp(-2.0 * x / s_l)) - 0.5 * r
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Assembled field
# ---------------------------------------------------------------------------

@dataclass
class HFRepField:
    """Signed distance-like field: sigmoid of the defining function times
    the smoothed unsigned distance."""

    frep: FRepNode
    smooth: object            # SmoothUDF or ADFTreeField
    s_l: float
    bbox: BoundingBox
    route: str
    interior_only: bool = False

    @property
    def dim(self):
        return self.bbox.dim

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        pts2 = np.atleast_2d(pts)
        if not np.all(self.bbox.contains(pts2)):
            raise DomainError("point outside the field's bounding box")
        out = sigmoid_step(self.frep.eval(pts2), self.s_l) * self.smooth.eval(pts2)
        return float(out[0]) if single else out

    def gradient_fd(self, pts, step=None):
        """Central-difference gradient (evaluation-only probe)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if step is None:
            step = 1e-6 * self.bbox.diagonal()
        g = np.zeros_like(pts)
        for a in range(self.dim):
            e = np.zeros(self.dim)
            e[a] = step
            g[:, a] = (self.eval(pts + e) - self.eval(pts - e)) / (2 * step)
        return g

    def sample(self, dims) -> ScalarGrid:
        g = ScalarGrid(dims, self.bbox)
        pts = g.node_coords().reshape(-1, self.dim)
        g.values = self.eval(pts).reshape(g.dims)
        return g


def default_slope(bbox: BoundingBox) -> float:
    return 1e-4 * bbox.diagonal()


def hfrep_build(tree: FRepNode, route: str, bbox: BoundingBox, res=257,
                s_l=None, min_depth=3, max_depth=7, eps=None, speed=None,
                source=None, validate=True):
    """Run the four-stage pipeline for the chosen unsigned-distance route.

    dt: sample -> seeds -> vector distance transform -> spline smoothing.
    fim: sample -> seeds -> eikonal fast iterative method -> spline (2D).
    hfim-adf: quadtree + hierarchical FIM; the tree's C1 patches already
        are the smooth interpolant, so no extra spline pass (2D).
    idf: boundary loop -> diffusion basis -> interior-only unsigned field
        from `source` (no sign restoration; flagged interior_only).
    """
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}, expected one of {ROUTES}")
    if s_l is None:
        s_l = default_slope(bbox)
    dim = bbox.dim

    if route == "dt":
        dims = (int(res),) * dim
        g = sample_frep(tree, dims, bbox)
        seeds = dt_mod.extract_seeds(g)
        udf = dt_mod.vector_dt(seeds).udf()
        smooth = SmoothUDF(udf, validate=validate)
        return HFRepField(tree, smooth, s_l, bbox, route)

    if route == "fim":
        if dim != 2:
            raise ValueError("the regular-grid eikonal route is 2D")
        dims = (int(res),) * 2
        g = sample_frep(tree, dims, bbox)
        seeds = dt_mod.extract_seeds(g)
        udf = eik_mod.fim_solve(seeds, speed=speed, eps=eps)
        smooth = SmoothUDF(udf, validate=validate)
        return HFRepField(tree, smooth, s_l, bbox, route)

    if route == "hfim-adf":
        if dim != 2:
            raise ValueError("the quadtree route is 2D")
        dims = (2 ** max_depth + 1,) * 2
        g = sample_frep(tree, dims, bbox)
        seeds = dt_mod.extract_seeds(g)
        qt = adf_mod.build_quadtree(tree, min_depth, max_depth, bbox)
        adf_mod.hfim_solve(qt, seeds, eps=eps)
        adf_mod.fit_c1_interpolants(qt)
        field = HFRepField(tree, adf_mod.ADFTreeField(qt), s_l, bbox, route)
        field.adf_tree = qt
        return field

    # idf: interior-only, unsigned
    if dim != 2:
        raise ValueError("the interior-distance route is 2D")
    dims = (int(res),) * 2
    g = sample_frep(tree, dims, bbox)
    loop = idf_mod.extract_boundary(g)[0]
    basis = idf_mod.basis_for_loop(loop)
    if source is None:
        source = bbox.center()
    field = idf_mod.IDFField(loop, basis, np.asarray(source, dtype=float), bbox)
    return field


def hfrep_eval(field, pts):
    """Evaluate an assembled field (bbox-checked)."""
    return field.eval(pts)
