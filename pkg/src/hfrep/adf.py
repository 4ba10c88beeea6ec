"""Adaptively sampled distance fields on quadtrees (2D).

The tree subdivides the computing domain by the sign structure of a
defining function: cells whose samples change sign are refined to the
maximum depth, everything else stops at the minimum depth.  Edge-adjacent
leaves are kept within one level of each other (extra refinement), so a
coarse edge carries at most one hanging vertex, at its midpoint.

Distances at cell corner vertices come from a fast-iterative eikonal
solve on the vertex graph, with per-axis spacings taken from the nearest
connected vertex along each axis.  Per-cell restoration is a C1 bicubic
Hermite patch: values, gradients and cross derivatives are estimated
once per vertex from the graph, and hanging vertices take their data
from the coarse neighbour's patch, which makes value and gradient agree
exactly across every interface, T-junctions included.  A bilinear
restoration of the same tree is kept around as the classic baseline it
improves on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .dt import SeedSet
from .eikonal import _godunov2
from .errors import DomainError, EmptyBoundaryError
from .frep import FRepNode
from .grid import BoundingBox


# corner order within a cell: (0,0), (1,0), (0,1), (1,1) in local coords
_CORNERS = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=np.int64)


def _hermite_matrix():
    """Map corner (f, fu, fv, fuv) data to bicubic monomial coefficients."""
    m = np.zeros((16, 16))
    corners = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]

    def mono(u, v, du, dv):
        row = np.zeros(16)
        for i in range(4):
            for j in range(4):
                cu = (0.0 if i == 0 else i * u ** (i - 1)) if du else u ** i
                cv = (0.0 if j == 0 else j * v ** (j - 1)) if dv else v ** j
                row[i * 4 + j] = cu * cv
        return row

    for c, (u, v) in enumerate(corners):
        m[c] = mono(u, v, 0, 0)
        m[4 + c] = mono(u, v, 1, 0)
        m[8 + c] = mono(u, v, 0, 1)
        m[12 + c] = mono(u, v, 1, 1)
    return np.linalg.inv(m)


_HERMITE_INV = _hermite_matrix()


@dataclass
class ADFTree:
    """Quadtree with shared corner vertices and per-leaf interpolants."""

    bbox: BoundingBox
    min_depth: int
    max_depth: int
    leaves: list                 # (depth, ix, iy) tuples
    leaf_set: dict               # (depth, ix, iy) -> leaf index
    vertex_gcoord: np.ndarray    # (V, 2) ints on the finest lattice [0, 2^max]^2
    vertex_id: dict              # (gi, gj) -> vid
    leaf_corners: np.ndarray     # (L, 4) vids
    values: np.ndarray = None          # HFIM vertex distances
    final_values: np.ndarray = None    # after hanging-vertex reconciliation
    patches: np.ndarray = None         # (L, 4, 4) bicubic coefficients
    bilinear: np.ndarray = None        # (L, 4) corner values, classic baseline
    hanging: list = field(default_factory=list)  # (vid, owner leaf index)

    @property
    def finest(self) -> int:
        return 2 ** self.max_depth

    def vertex_world(self, vids=None) -> np.ndarray:
        g = self.vertex_gcoord if vids is None else self.vertex_gcoord[vids]
        return self.bbox.lo + g / self.finest * self.bbox.extent

    def leaf_count(self) -> int:
        return len(self.leaves)

    def vertex_count(self) -> int:
        return len(self.vertex_gcoord)

    def depth_histogram(self) -> dict:
        hist = {}
        for d, _, _ in self.leaves:
            hist[d] = hist.get(d, 0) + 1
        return dict(sorted(hist.items()))

    def cell_bbox(self, leaf_index):
        d, ix, iy = self.leaves[leaf_index]
        size = self.bbox.extent / 2 ** d
        lo = self.bbox.lo + np.array([ix, iy]) * size
        return lo, lo + size

    def dump_stats(self) -> str:
        lines = [
            f"leaves: {self.leaf_count()}",
            f"vertices: {self.vertex_count()}",
            "depth histogram: "
            + " ".join(f"{d}:{n}" for d, n in self.depth_histogram().items()),
            f"uniform grid nodes at finest resolution: {(self.finest + 1) ** 2}",
            f"vertex fraction: {self.vertex_count() / (self.finest + 1) ** 2:.4f}",
        ]
        return "\n".join(lines)

    # -- point location ----------------------------------------------------

    def locate(self, pts) -> np.ndarray:
        """Leaf index per point (DomainError outside the box)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if not np.all(self.bbox.contains(pts)):
            raise DomainError("point outside the tree's bounding box")
        n = self.finest
        u = (pts - self.bbox.lo) / self.bbox.extent * n
        fi = np.clip(np.floor(u).astype(np.int64), 0, n - 1)
        out = np.empty(len(pts), dtype=np.int64)
        for k in range(len(pts)):
            ix, iy = fi[k, 0], fi[k, 1]
            for d in range(self.max_depth, -1, -1):
                shift = self.max_depth - d
                key = (d, ix >> shift, iy >> shift)
                hit = self.leaf_set.get(key, -1)
                if hit >= 0:
                    out[k] = hit
                    break
            else:
                raise RuntimeError("tree does not cover its own domain")
        return out

    # -- evaluation ---------------------------------------------------------

    def _local_coords(self, pts, leaf_idx):
        depths = np.array([self.leaves[li][0] for li in leaf_idx])
        cells = np.array([(self.leaves[li][1], self.leaves[li][2]) for li in leaf_idx])
        size = self.bbox.extent / (2.0 ** depths)[:, None]
        lo = self.bbox.lo + cells * size
        t = (pts - lo) / size
        return np.clip(t, 0.0, 1.0), size

    def eval(self, pts, mode="c1"):
        """Restored field at points (C1 patches, or 'bilinear' baseline)."""
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        li = self.locate(pts)
        t, _ = self._local_coords(pts, li)
        u, v = t[:, 0], t[:, 1]
        if mode == "bilinear":
            if self.bilinear is None:
                raise RuntimeError("interpolants not fitted yet")
            c = self.bilinear[li]
            out = (c[:, 0] * (1 - u) * (1 - v) + c[:, 1] * u * (1 - v)
                   + c[:, 2] * (1 - u) * v + c[:, 3] * u * v)
        else:
            if self.patches is None:
                raise RuntimeError("interpolants not fitted yet")
            pu = np.stack([np.ones_like(u), u, u * u, u ** 3], axis=-1)
            pv = np.stack([np.ones_like(v), v, v * v, v ** 3], axis=-1)
            out = np.einsum("mij,mi,mj->m", self.patches[li], pu, pv)
        return out[0] if single else out

    def eval_gradient(self, pts, mode="c1"):
        """Analytic world-space gradient of the restored field."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        li = self.locate(pts)
        t, size = self._local_coords(pts, li)
        u, v = t[:, 0], t[:, 1]
        if mode == "bilinear":
            c = self.bilinear[li]
            gu = (c[:, 1] - c[:, 0]) * (1 - v) + (c[:, 3] - c[:, 2]) * v
            gv = (c[:, 2] - c[:, 0]) * (1 - u) + (c[:, 3] - c[:, 1]) * u
        else:
            pu = np.stack([np.ones_like(u), u, u * u, u ** 3], axis=-1)
            pv = np.stack([np.ones_like(v), v, v * v, v ** 3], axis=-1)
            du = np.stack([np.zeros_like(u), np.ones_like(u), 2 * u, 3 * u * u], axis=-1)
            dv = np.stack([np.zeros_like(v), np.ones_like(v), 2 * v, 3 * v * v], axis=-1)
            gu = np.einsum("mij,mi,mj->m", self.patches[li], du, pv)
            gv = np.einsum("mij,mi,mj->m", self.patches[li], pu, dv)
        return np.stack([gu / size[:, 0], gv / size[:, 1]], axis=-1)


class ADFTreeField:
    """Unsigned restored field adapter (eval + bbox), pipeline-facing."""

    def __init__(self, tree: ADFTree, mode="c1"):
        self.tree = tree
        self.bbox = tree.bbox
        self.mode = mode

    def eval(self, pts):
        return self.tree.eval(pts, mode=self.mode)

    def gradient(self, pts):
        return self.tree.eval_gradient(pts, mode=self.mode)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def _boundary_flags(tree_fn, bbox, cells, ns):
    """Sign-change test for a batch of (depth, ix, iy) cells."""
    if not cells:
        return np.zeros(0, dtype=bool)
    t = np.linspace(0.0, 1.0, ns)
    tu, tv = np.meshgrid(t, t, indexing="ij")
    local = np.stack([tu, tv], axis=-1).reshape(-1, 2)       # (ns*ns, 2)
    cells_arr = np.array([(c[1], c[2]) for c in cells], dtype=float)
    depths = np.array([c[0] for c in cells], dtype=float)
    size = bbox.extent / (2.0 ** depths)[:, None]
    lo = bbox.lo + cells_arr * size
    pts = lo[:, None, :] + local[None, :, :] * size[:, None, :]
    vals = tree_fn.eval(pts.reshape(-1, 2)).reshape(len(cells), -1)
    return (vals.min(axis=1) <= 0.0) & (vals.max(axis=1) >= 0.0)


def build_quadtree(tree: FRepNode, min_depth: int, max_depth: int,
                   bbox: BoundingBox, samples_per_axis: int = 9) -> ADFTree:
    """Subdivide by sign structure: boundary cells to max_depth, the rest
    to min_depth, then balance to one level across edges."""
    if not (1 <= min_depth <= max_depth <= 12):
        raise ValueError("need 1 <= min_depth <= max_depth <= 12")
    leaf_list = []
    internal = set()
    level = [(0, 0, 0)]
    for d in range(0, max_depth + 1):
        if not level:
            break
        if d < min_depth:
            split = np.ones(len(level), dtype=bool)
        elif d == max_depth:
            split = np.zeros(len(level), dtype=bool)
        else:
            split = _boundary_flags(tree, bbox, level, samples_per_axis)
        nxt = []
        for cell, s in zip(level, split):
            if s:
                internal.add(cell)
                cd, cx, cy = cell
                for dx in (0, 1):
                    for dy in (0, 1):
                        nxt.append((cd + 1, 2 * cx + dx, 2 * cy + dy))
            else:
                leaf_list.append(cell)
        level = nxt

    leaf_set = set(leaf_list)

    def _unbalanced(cell):
        d, ix, iy = cell
        if d + 1 >= max_depth:
            return False
        n = 1 << d
        for nix, niy, cxs in (
            (ix + 1, iy, [(0, 0), (0, 1)]),
            (ix - 1, iy, [(1, 0), (1, 1)]),
            (ix, iy + 1, [(0, 0), (1, 0)]),
            (ix, iy - 1, [(0, 1), (1, 1)]),
        ):
            if not (0 <= nix < n and 0 <= niy < n):
                continue
            for ox, oy in cxs:
                if (d + 1, 2 * nix + ox, 2 * niy + oy) in internal:
                    return True
        return False

    # balance closure; children of balance splits are re-tested for boundary
    work = [c for c in leaf_set if _unbalanced(c)]
    while work:
        wave = []
        for cell in work:
            if cell not in leaf_set or not _unbalanced(cell):
                continue
            leaf_set.discard(cell)
            internal.add(cell)
            cd, cx, cy = cell
            for dx in (0, 1):
                for dy in (0, 1):
                    wave.append((cd + 1, 2 * cx + dx, 2 * cy + dy))
        if not wave:
            break
        testable = [c for c in wave if c[0] < max_depth]
        flags = _boundary_flags(tree, bbox, testable, samples_per_axis)
        flagged = {c for c, f in zip(testable, flags) if f}
        # boundary children refine straight to max depth
        deep = list(flagged)
        while deep:
            nxt_deep = []
            for cell in deep:
                internal.add(cell)
                cd, cx, cy = cell
                for dx in (0, 1):
                    for dy in (0, 1):
                        child = (cd + 1, 2 * cx + dx, 2 * cy + dy)
                        if child[0] == max_depth:
                            leaf_set.add(child)
                        else:
                            nxt_deep.append(child)
            if nxt_deep:
                fl = _boundary_flags(tree, bbox, nxt_deep, samples_per_axis)
                for cell, f in zip(nxt_deep, fl):
                    if f:
                        # keep refining
                        pass
                    else:
                        leaf_set.add(cell)
                deep = [c for c, f in zip(nxt_deep, fl) if f]
            else:
                deep = []
        for cell in wave:
            if cell not in internal and cell not in flagged and cell not in leaf_set:
                leaf_set.add(cell)
        work = [c for c in leaf_set if _unbalanced(c)]

    leaves = sorted(leaf_set)
    leaf_index = {c: i for i, c in enumerate(leaves)}

    # shared vertex table on the finest lattice
    vertex_id = {}
    gcoords = []
    corners = np.empty((len(leaves), 4), dtype=np.int64)
    for i, (d, ix, iy) in enumerate(leaves):
        s = 1 << (max_depth - d)
        for c, (ox, oy) in enumerate(_CORNERS):
            g = (ix * s + ox * s, iy * s + oy * s)
            vid = vertex_id.get(g)
            if vid is None:
                vid = len(gcoords)
                vertex_id[g] = vid
                gcoords.append(g)
            corners[i, c] = vid

    adf = ADFTree(
        bbox=bbox,
        min_depth=min_depth,
        max_depth=max_depth,
        leaves=leaves,
        leaf_set=leaf_index,
        vertex_gcoord=np.array(gcoords, dtype=np.int64),
        vertex_id=vertex_id,
        leaf_corners=corners,
    )
    adf.hanging = _find_hanging(adf)
    return adf


def _find_hanging(adf: ADFTree):
    """(vid, owner leaf index) for vertices interior to a leaf edge.  With
    a balanced tree only edge midpoints can hang."""
    hanging = []
    for i, (d, ix, iy) in enumerate(adf.leaves):
        s = 1 << (adf.max_depth - d)
        if s == 1:
            continue
        gx, gy = ix * s, iy * s
        half = s // 2
        mids = [
            (gx + half, gy),          # bottom edge
            (gx + half, gy + s),      # top edge
            (gx, gy + half),          # left edge
            (gx + s, gy + half),      # right edge
        ]
        for g in mids:
            vid = adf.vertex_id.get(g)
            if vid is not None:
                hanging.append((vid, i))
    return hanging


# ---------------------------------------------------------------------------
# Hierarchical FIM
# ---------------------------------------------------------------------------

def _vertex_graph(adf: ADFTree):
    """Per-vertex nearest connected neighbour and spacing along -x,+x,-y,+y."""
    nv = adf.vertex_count()
    neigh = np.full((nv, 4), -1, dtype=np.int64)
    spac = np.zeros((nv, 4))
    world = adf.vertex_world()

    def connect(va, vb, axis):
        dist = abs(world[vb, axis] - world[va, axis])
        sign = 1 if world[vb, axis] > world[va, axis] else 0
        d_ab = axis * 2 + sign          # direction of b as seen from a
        d_ba = axis * 2 + (1 - sign)
        if neigh[va, d_ab] < 0 or dist < spac[va, d_ab]:
            neigh[va, d_ab] = vb
            spac[va, d_ab] = dist
        if neigh[vb, d_ba] < 0 or dist < spac[vb, d_ba]:
            neigh[vb, d_ba] = va
            spac[vb, d_ba] = dist

    for i, (d, ix, iy) in enumerate(adf.leaves):
        s = 1 << (adf.max_depth - d)
        gx, gy = ix * s, iy * s
        c = adf.leaf_corners[i]
        half = s // 2 if s > 1 else 0
        edges = [
            (c[0], c[1], (gx + half, gy), 0),
            (c[2], c[3], (gx + half, gy + s), 0),
            (c[0], c[2], (gx, gy + half), 1),
            (c[1], c[3], (gx + s, gy + half), 1),
        ]
        for va, vb, mid_g, axis in edges:
            mid = adf.vertex_id.get(mid_g) if half else None
            if mid is None:
                connect(va, vb, axis)
            else:
                connect(va, mid, axis)
                connect(mid, vb, axis)
    return neigh, spac


@njit(cache=True, inline="always")
def _graph_update(values, neigh, spac, v, big):
    a = big
    ha = 1.0
    for d in range(2):
        nb = neigh[v, d]
        if nb >= 0 and values[nb] < a:
            a = values[nb]
            ha = spac[v, d]
    b = big
    hb = 1.0
    for d in range(2, 4):
        nb = neigh[v, d]
        if nb >= 0 and values[nb] < b:
            b = values[nb]
            hb = spac[v, d]
    return _godunov2(a, b, ha, hb, 1.0, big)


@njit(cache=True)
def _hfim(values, pinned, neigh, spac, eps, big, order):
    nv = values.shape[0]
    in_list = np.zeros(nv, dtype=np.bool_)
    cur = np.empty(nv, dtype=np.int64)
    nxt = np.empty(nv, dtype=np.int64)
    n_cur = 0
    for v in range(nv):
        if pinned[v]:
            for d in range(4):
                nb = neigh[v, d]
                if nb >= 0 and not pinned[nb] and not in_list[nb]:
                    in_list[nb] = True
                    cur[n_cur] = nb
                    n_cur += 1
    while n_cur > 0:
        n_nxt = 0
        if order > 0:
            start, stop, step = 0, n_cur, 1
        else:
            start, stop, step = n_cur - 1, -1, -1
        for s in range(start, stop, step):
            v = cur[s]
            if not in_list[v]:
                continue
            p = values[v]
            q = _graph_update(values, neigh, spac, v, big)
            if q < p:
                values[v] = q
            if p - q <= eps:
                in_list[v] = False
                for d in range(4):
                    nb = neigh[v, d]
                    if nb >= 0 and not pinned[nb] and not in_list[nb]:
                        q2 = _graph_update(values, neigh, spac, nb, big)
                        if q2 < values[nb]:
                            values[nb] = q2
                            in_list[nb] = True
                            nxt[n_nxt] = nb
                            n_nxt += 1
            else:
                nxt[n_nxt] = v
                n_nxt += 1
        cur, nxt = nxt, cur
        n_cur = n_nxt
    return values


def _seed_vertex_pins(adf: ADFTree, seeds: SeedSet):
    """Pin vertices incident to each seed at their exact seed distance."""
    big = 10.0 * adf.bbox.diagonal()
    nv = adf.vertex_count()
    phi = np.full(nv, big)
    pinned = np.zeros(nv, dtype=bool)
    n = adf.finest
    world = adf.vertex_world()
    lattice_dims = (n + 1, n + 1)
    on_lattice = tuple(seeds.grid_dims) == lattice_dims

    def pin(vid, pos):
        d = float(np.linalg.norm(world[vid] - pos))
        if d < phi[vid]:
            phi[vid] = d
        pinned[vid] = True

    for k in range(len(seeds)):
        pos = seeds.positions[k]
        hit = False
        if on_lattice and seeds.axis[k] >= 0:
            base = seeds.base_index[k]
            other = base.copy()
            other[seeds.axis[k]] += 1
            for node in (base, other):
                vid = adf.vertex_id.get((int(node[0]), int(node[1])))
                if vid is not None:
                    pin(vid, pos)
                    hit = True
        if not hit:
            li = int(adf.locate(pos)[0])
            for vid in adf.leaf_corners[li]:
                pin(int(vid), pos)
    return phi, pinned


def hfim_solve(adf: ADFTree, seeds: SeedSet, eps=None, order=1) -> np.ndarray:
    """Eikonal vertex distances on the tree; also stored on adf.values."""
    if seeds is None or len(seeds) == 0:
        raise EmptyBoundaryError("hierarchical FIM needs a non-empty seed set")
    h_fine = float(np.min(adf.bbox.extent)) / adf.finest
    if eps is None:
        eps = 1e-6 * h_fine
    if eps <= 0:
        raise ValueError("eps must be positive")
    neigh, spac = _vertex_graph(adf)
    phi, pinned = _seed_vertex_pins(adf, seeds)
    big = 10.0 * adf.bbox.diagonal()
    _hfim(phi, pinned, neigh, spac, eps, big, 1 if order >= 0 else -1)
    adf.values = phi
    adf._pinned = pinned
    adf._graph = (neigh, spac)
    return phi


def hfim_residual(adf: ADFTree) -> float:
    """Max |local update - value| over non-source vertices."""
    neigh, spac = adf._graph
    big = 10.0 * adf.bbox.diagonal()
    worst = 0.0
    for v in range(adf.vertex_count()):
        if adf._pinned[v]:
            continue
        q = _graph_update(adf.values, neigh, spac, v, big)
        worst = max(worst, abs(q - adf.values[v]))
    return worst


# ---------------------------------------------------------------------------
# C1 restoration
# ---------------------------------------------------------------------------

def _unequal_central(vl, vc, vr, hl, hr):
    return (vr * hl ** 2 - vl * hr ** 2 + vc * (hr ** 2 - hl ** 2)) / (hl * hr * (hl + hr))


def _vertex_derivative(values, neigh, spac, axis):
    """Graph finite-difference d(values)/d(axis) per vertex."""
    nv = len(values)
    out = np.zeros(nv)
    d_neg, d_pos = 2 * axis, 2 * axis + 1
    for v in range(nv):
        nl, nr = neigh[v, d_neg], neigh[v, d_pos]
        if nl >= 0 and nr >= 0:
            out[v] = _unequal_central(values[nl], values[v], values[nr],
                                      spac[v, d_neg], spac[v, d_pos])
        elif nr >= 0:
            out[v] = (values[nr] - values[v]) / spac[v, d_pos]
        elif nl >= 0:
            out[v] = (values[v] - values[nl]) / spac[v, d_neg]
    return out


def _patch_coeffs(f, fx, fy, fxy, size):
    """Bicubic coefficients for one cell from world-scaled corner data."""
    data = np.concatenate([f, fx * size[0], fy * size[1], fxy * size[0] * size[1]])
    return (_HERMITE_INV @ data).reshape(4, 4)


def _patch_eval_with_derivs(coeffs, u, v, size):
    pu = np.array([1.0, u, u * u, u ** 3])
    pv = np.array([1.0, v, v * v, v ** 3])
    du = np.array([0.0, 1.0, 2 * u, 3 * u * u])
    dv = np.array([0.0, 1.0, 2 * v, 3 * v * v])
    val = pu @ coeffs @ pv
    gx = (du @ coeffs @ pv) / size[0]
    gy = (pu @ coeffs @ dv) / size[1]
    gxy = (du @ coeffs @ dv) / (size[0] * size[1])
    return val, gx, gy, gxy


def fit_c1_interpolants(adf: ADFTree, values=None) -> np.ndarray:
    """Fit per-leaf C1 bicubic patches; hanging vertices inherit their
    Hermite data from the coarse side.  Returns the patch array and also
    reconciles adf.final_values so stored vertex values match the field."""
    if values is None:
        values = adf.values
    if values is None:
        raise RuntimeError("run hfim_solve first or pass vertex values")
    neigh, spac = getattr(adf, "_graph", (None, None))
    if neigh is None:
        neigh, spac = _vertex_graph(adf)

    f = np.array(values, dtype=float)
    fx = _vertex_derivative(f, neigh, spac, 0)
    fy = _vertex_derivative(f, neigh, spac, 1)
    fxy = _vertex_derivative(fy, neigh, spac, 0)

    adf.bilinear = f[adf.leaf_corners].copy()

    # hanging vertices take value + derivatives from the owner patch,
    # processed coarse-to-fine so owner corner data is already final
    owners = sorted(adf.hanging, key=lambda vo: adf.leaves[vo[1]][0])
    n = adf.finest
    for vid, li in owners:
        d, ix, iy = adf.leaves[li]
        s = 1 << (adf.max_depth - d)
        size = adf.bbox.extent / 2 ** d
        c = adf.leaf_corners[li]
        coeffs = _patch_coeffs(f[c], fx[c], fy[c], fxy[c], size)
        g = adf.vertex_gcoord[vid]
        u = (g[0] - ix * s) / s
        v = (g[1] - iy * s) / s
        f[vid], fx[vid], fy[vid], fxy[vid] = _patch_eval_with_derivs(coeffs, u, v, size)

    patches = np.empty((len(adf.leaves), 4, 4))
    for li in range(len(adf.leaves)):
        d, _, _ = adf.leaves[li]
        size = adf.bbox.extent / 2 ** d
        c = adf.leaf_corners[li]
        patches[li] = _patch_coeffs(f[c], fx[c], fy[c], fxy[c], size)
    adf.patches = patches
    adf.final_values = f
    return patches


def interface_samples(adf: ADFTree, count, rng):
    """Random points on interior leaf interfaces with the two leaves each
    point separates; used by the continuity harnesses."""
    edges = []
    n = adf.finest
    for i, (d, ix, iy) in enumerate(adf.leaves):
        s = 1 << (adf.max_depth - d)
        gx, gy = ix * s, iy * s
        if gx + s < n:
            edges.append((i, 0, gx + s, gy, gy + s))      # right edge, axis x
        if gy + s < n:
            edges.append((i, 1, gy + s, gx, gx + s))      # top edge, axis y
    out = []
    ext = adf.bbox.extent
    for _ in range(count):
        i, axis, gfixed, ga, gb = edges[rng.integers(len(edges))]
        t = rng.uniform(ga + 1e-6 * (gb - ga), gb - 1e-6 * (gb - ga))
        if axis == 0:
            p = adf.bbox.lo + np.array([gfixed, t]) / n * ext
            delta = np.array([1e-9 * ext[0], 0.0])
        else:
            p = adf.bbox.lo + np.array([t, gfixed]) / n * ext
            delta = np.array([0.0, 1e-9 * ext[1]])
        la = int(adf.locate(p - delta)[0])
        lb = int(adf.locate(p + delta)[0])
        if la != lb:
            out.append((p, la, lb))
    return out


def interface_jumps(adf: ADFTree, count=10000, mode="c1", seed=0):
    """Max |value jump| and ||gradient jump|| across leaf interfaces."""
    rng = np.random.default_rng(seed)
    samples = interface_samples(adf, count, rng)
    dv = 0.0
    dg = 0.0
    for p, la, lb in samples:
        va, ga = _eval_on_leaf(adf, p, la, mode)
        vb, gb = _eval_on_leaf(adf, p, lb, mode)
        dv = max(dv, abs(va - vb))
        dg = max(dg, float(np.linalg.norm(ga - gb)))
    return dv, dg


def _eval_on_leaf(adf: ADFTree, p, li, mode):
    d, ix, iy = adf.leaves[li]
    size = adf.bbox.extent / 2 ** d
    lo = adf.bbox.lo + np.array([ix, iy]) * size
    t = np.clip((p - lo) / size, 0.0, 1.0)
    if mode == "bilinear":
        c = adf.bilinear[li]
        u, v = t
        val = (c[0] * (1 - u) * (1 - v) + c[1] * u * (1 - v)
               + c[2] * (1 - u) * v + c[3] * u * v)
        gu = (c[1] - c[0]) * (1 - v) + (c[3] - c[2]) * v
        gv = (c[2] - c[0]) * (1 - u) + (c[3] - c[1]) * u
        return val, np.array([gu / size[0], gv / size[1]])
    val, gx, gy, _ = _patch_eval_with_derivs(adf.patches[li], t[0], t[1], size)
    return val, np.array([gx, gy])


def adf_eval(adf: ADFTree, pts, mode="c1"):
    """Restored unsigned field at points inside the bounding box."""
    return adf.eval(pts, mode=mode)
