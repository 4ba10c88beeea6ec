"""Interior distance fields (2D): boundary extraction, diffusion maps on
the boundary graph, and mean-value-coordinate propagation inside.

The boundary of a sampled defining function is traced by marching
squares with linear interpolation, oriented so the positive region lies
on the left (loops around objects come out counter-clockwise).  A
path-graph Laplacian with inverse-edge-length weights plays the role of
the 1D Laplace-Beltrami operator; its low eigenpairs give a diffusion
embedding of the boundary vertices, in which the diffusion distance is
plain Euclidean distance:

    d2(i, j) = sum_k exp(-2 lambda_k t) (phi_k(i) - phi_k(j))^2

Interior queries are mapped into the same embedding by interpolating the
vertex embeddings with mean value coordinates; distances between
interpolated embeddings reproduce the boundary data at the boundary and
vanish when the arguments coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, EmptyBoundaryError, FieldError
from .grid import ScalarGrid


# ---------------------------------------------------------------------------
# Boundary loops
# ---------------------------------------------------------------------------

@dataclass
class BoundaryLoop:
    """Closed polyline; vertices ordered with the interior on the left."""

    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2 or len(self.vertices) < 3:
            raise ValueError("a loop needs at least three 2D vertices")

    def __len__(self):
        return len(self.vertices)

    def edges(self):
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    def edge_lengths(self):
        return np.linalg.norm(self.edges(), axis=1)

    def perimeter(self):
        return float(self.edge_lengths().sum())

    def signed_area(self):
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))

    def is_ccw(self):
        return self.signed_area() > 0

    def contains(self, pts):
        """Even-odd ray casting; points on the boundary are unreliable here,
        callers handle the near-boundary band separately."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        x, y = pts[:, 0, None], pts[:, 1, None]
        cond = (v[None, :, 1] > y) != (w[None, :, 1] > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = v[None, :, 0] + (y - v[None, :, 1]) / (w[None, :, 1] - v[None, :, 1]) \
                * (w[None, :, 0] - v[None, :, 0])
        crossings = np.sum(cond & (xint > x), axis=1)
        return crossings % 2 == 1

    def boundary_distance(self, pts):
        """Distance from points to the polyline (vectorised, for tolerance
        checks near the boundary)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        v = self.vertices
        e = self.edges()
        ee = np.einsum("ij,ij->i", e, e)
        d = pts[:, None, :] - v[None, :, :]
        t = np.clip(np.einsum("mnj,nj->mn", d, e) / ee[None, :], 0.0, 1.0)
        proj = d - t[:, :, None] * e[None, :, :]
        return np.sqrt(np.einsum("mnj,mnj->mn", proj, proj)).min(axis=1)


# case table: per corner-sign case, list of (from_edge, to_edge) local edges
# (0 bottom, 1 right, 2 top, 3 left); interior (positive) stays on the left
_MS_TABLE = {
    1: [(0, 3)], 2: [(1, 0)], 3: [(1, 3)], 4: [(2, 1)],
    6: [(2, 0)], 7: [(2, 3)], 8: [(3, 2)], 9: [(0, 2)],
    11: [(1, 2)], 12: [(3, 1)], 13: [(0, 1)], 14: [(3, 0)],
}


def extract_boundary(g: ScalarGrid, min_vertices=3):
    """Trace the zero level of a sampled field into closed loops."""
    if g.dim != 2:
        raise ValueError("boundary extraction is 2D")
    v = g.values
    nx, ny = g.dims
    inside = v > 0.0
    if not inside.any() or inside.all():
        raise EmptyBoundaryError("grid has no sign change: empty boundary")

    xs, ys = g.axes()

    def edge_key(i, j, local):
        if local == 0:
            return ("x", i, j)
        if local == 2:
            return ("x", i, j + 1)
        if local == 1:
            return ("y", i + 1, j)
        return ("y", i, j)

    # crossing position per global edge (computed lazily)
    cross_pos = {}

    def crossing(key):
        p = cross_pos.get(key)
        if p is not None:
            return p
        kind, i, j = key
        if kind == "x":
            a, b = v[i, j], v[i + 1, j]
            t = a / (a - b)
            p = np.array([xs[i] + t * (xs[i + 1] - xs[i]), ys[j]])
        else:
            a, b = v[i, j], v[i, j + 1]
            t = a / (a - b)
            p = np.array([xs[i], ys[j] + t * (ys[j + 1] - ys[j])])
        cross_pos[key] = p
        return p

    succ = {}
    for i in range(nx - 1):
        for j in range(ny - 1):
            case = (1 * inside[i, j] + 2 * inside[i + 1, j]
                    + 4 * inside[i + 1, j + 1] + 8 * inside[i, j + 1])
            if case in (0, 15):
                continue
            if case in (5, 10):
                center = 0.25 * (v[i, j] + v[i + 1, j] + v[i, j + 1] + v[i + 1, j + 1])
                if case == 5:
                    segs = [(2, 3), (0, 1)] if center > 0 else [(0, 3), (2, 1)]
                else:
                    segs = [(3, 0), (1, 2)] if center > 0 else [(1, 0), (3, 2)]
            else:
                segs = _MS_TABLE[case]
            for frm, to in segs:
                succ[edge_key(i, j, frm)] = edge_key(i, j, to)

    loops = []
    seen = set()
    for start in succ:
        if start in seen:
            continue
        chain = []
        key = start
        while True:
            seen.add(key)
            chain.append(crossing(key))
            key = succ.get(key)
            if key is None:
                raise FieldError("open boundary chain (object leaves the grid?)")
            if key == start:
                break
        pts = np.array(chain)
        keep = np.linalg.norm(pts - np.roll(pts, 1, axis=0), axis=1) > 1e-14
        pts = pts[keep]
        if len(pts) >= min_vertices:
            loops.append(BoundaryLoop(pts))
    if not loops:
        raise EmptyBoundaryError("no closed loops found")
    loops.sort(key=lambda lp: -abs(lp.signed_area()))
    return loops


# ---------------------------------------------------------------------------
# Boundary Laplacian and spectral basis
# ---------------------------------------------------------------------------

def boundary_laplacian(loop: BoundaryLoop) -> np.ndarray:
    """Edge-length-weighted Laplacian of the closed path graph."""
    n = len(loop)
    lens = loop.edge_lengths()
    if np.any(lens <= 0) or np.any(lens < 1e-14):
        raise FieldError("degenerate zero-length boundary edge")
    w = 1.0 / lens                         # weight of edge (i, i+1)
    lap = np.zeros((n, n))
    idx = np.arange(n)
    nxt = (idx + 1) % n
    lap[idx, nxt] -= w
    lap[nxt, idx] -= w
    np.add.at(lap, (idx, idx), w)
    np.add.at(lap, (nxt, nxt), w)
    return lap


@dataclass
class SpectralBasis:
    """Smallest eigenpairs of a boundary Laplacian plus the diffusion
    scale; powers diffusion distances between boundary vertices."""

    eigenvalues: np.ndarray      # ascending, first ~0
    eigenvectors: np.ndarray     # (n, m), orthonormal columns
    t: float                     # diffusion time

    @property
    def m(self):
        return len(self.eigenvalues)

    def embedding(self) -> np.ndarray:
        """Per-vertex diffusion-map coordinates (constant mode dropped)."""
        lam = self.eigenvalues[1:]
        phi = self.eigenvectors[:, 1:]
        return phi * np.exp(-lam * self.t)[None, :]


def spectral_decompose(lap: np.ndarray, m: int, t: float = None,
                       residual_tol: float = 1e-8) -> SpectralBasis:
    """m smallest eigenpairs of a symmetric PSD operator.

    Dense symmetric eigensolve; raises if any residual ||L phi - lam phi||
    exceeds the contract tolerance.
    """
    n = lap.shape[0]
    if not (1 <= m <= n):
        raise ValueError("number of eigenpairs out of range")
    vals, vecs = scipy.linalg.eigh(lap, subset_by_index=(0, m - 1))
    res = np.linalg.norm(lap @ vecs - vecs * vals[None, :], axis=0)
    if np.any(res > residual_tol):
        raise FieldError(f"eigensolver residual {res.max():.2e} above {residual_tol:.0e}")
    if t is None:
        # zero-mode threshold relative to the operator scale, so the
        # numerically-zero constant mode never sets the diffusion time
        zero_tol = max(1e-300, 1e-9 * float(np.abs(lap).max()))
        nonzero = vals[vals > zero_tol]
        t = 1.0 / nonzero[0] if len(nonzero) else 1.0
    return SpectralBasis(vals, vecs, float(t))


def basis_for_loop(loop: BoundaryLoop, m: int = None, t: float = None) -> SpectralBasis:
    if m is None:
        m = min(64, len(loop))
    return spectral_decompose(boundary_laplacian(loop), m, t)


def diffusion_distance(basis: SpectralBasis, i, j) -> float:
    """Euclidean distance between diffusion-map embeddings of vertices."""
    emb = basis.embedding()
    return float(np.linalg.norm(emb[int(i)] - emb[int(j)]))


def diffusion_distance_matrix(basis: SpectralBasis) -> np.ndarray:
    emb = basis.embedding()
    diff = emb[:, None, :] - emb[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


# ---------------------------------------------------------------------------
# Mean value coordinates
# ---------------------------------------------------------------------------

def _mvc_batch(verts, pts, atol):
    """Raw tangent-half-angle MVC for points assumed strictly inside."""
    r = verts[None, :, :] - pts[:, None, :]              # (M, N, 2)
    d = np.linalg.norm(r, axis=2)
    r_next = np.roll(r, -1, axis=1)
    d_next = np.roll(d, -1, axis=1)
    cross = r[:, :, 0] * r_next[:, :, 1] - r[:, :, 1] * r_next[:, :, 0]
    dot = np.einsum("mnj,mnj->mn", r, r_next)
    tan_half = cross / (d * d_next + dot)
    w = (np.roll(tan_half, 1, axis=1) + tan_half) / d
    return w / w.sum(axis=1, keepdims=True)


def mvc_weights(loop: BoundaryLoop, q, atol=1e-9):
    """Mean value coordinates of a query point w.r.t. the loop vertices.

    Points within atol of the boundary get vertex/edge-interpolating
    weights (the limit case); points outside raise DomainError.
    """
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    pts = np.atleast_2d(q)
    verts = loop.vertices
    n = len(verts)
    out = np.empty((len(pts), n))

    bd = loop.boundary_distance(pts)
    near = bd <= atol
    inside = loop.contains(pts)
    if np.any(~inside & ~near):
        raise DomainError("query point outside the boundary loop")

    far = ~near
    if np.any(far):
        out[far] = _mvc_batch(verts, pts[far], atol)
    for k in np.nonzero(near)[0]:
        out[k] = _edge_interp_weights(loop, pts[k])
    return out[0] if single else out


def _edge_interp_weights(loop: BoundaryLoop, p):
    """Interpolating weights for a point on (or next to) the boundary."""
    v = loop.vertices
    e = loop.edges()
    ee = np.einsum("ij,ij->i", e, e)
    d = p[None, :] - v
    t = np.clip(np.einsum("nj,nj->n", d, e) / ee, 0.0, 1.0)
    proj = d - t[:, None] * e
    dist = np.einsum("nj,nj->n", proj, proj)
    k = int(np.argmin(dist))
    w = np.zeros(len(v))
    w[k] = 1.0 - t[k]
    w[(k + 1) % len(v)] = t[k]
    return w


# ---------------------------------------------------------------------------
# Interior field
# ---------------------------------------------------------------------------

def idf_field(loop: BoundaryLoop, basis: SpectralBasis, source, q, atol=1e-9):
    """Shape-aware distance between a source (boundary vertex index or
    interior point) and query points inside the loop."""
    emb = basis.embedding()
    if np.isscalar(source) or isinstance(source, (int, np.integer)):
        e_s = emb[int(source)]
    else:
        e_s = mvc_weights(loop, np.asarray(source, dtype=float), atol) @ emb
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    w = mvc_weights(loop, q, atol)
    e_q = np.atleast_2d(w @ emb)
    out = np.linalg.norm(e_q - e_s[None, :], axis=1)
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# Text serialisation (CLI-run caching)
# ---------------------------------------------------------------------------

def loop_to_text(loop: BoundaryLoop) -> str:
    lines = [f"boundary-loop {len(loop)}"]
    lines += [f"{float(x)!r} {float(y)!r}" for x, y in loop.vertices]
    return "\n".join(lines) + "\n"


def loop_from_text(text: str) -> BoundaryLoop:
    lines = text.strip().splitlines()
    head = lines[0].split()
    if head[0] != "boundary-loop":
        raise FieldError("not a boundary-loop block")
    n = int(head[1])
    verts = np.array([[float(v) for v in ln.split()] for ln in lines[1:1 + n]])
    return BoundaryLoop(verts)


def basis_to_text(basis: SpectralBasis) -> str:
    n, m = basis.eigenvectors.shape
    lines = [f"spectral-basis {n} {m} {float(basis.t)!r}",
             " ".join(repr(float(v)) for v in basis.eigenvalues)]
    lines += [" ".join(repr(float(v)) for v in row) for row in basis.eigenvectors]
    return "\n".join(lines) + "\n"


def basis_from_text(text: str) -> SpectralBasis:
    lines = text.strip().splitlines()
    head = lines[0].split()
    if head[0] != "spectral-basis":
        raise FieldError("not a spectral-basis block")
    n, m, t = int(head[1]), int(head[2]), float(head[3])
    vals = np.array([float(v) for v in lines[1].split()])
    vecs = np.array([[float(v) for v in ln.split()] for ln in lines[2:2 + n]])
    if vals.shape != (m,) or vecs.shape != (n, m):
        raise FieldError("malformed spectral-basis block")
    return SpectralBasis(vals, vecs, t)


class IDFField:
    """Interior-only unsigned field: distance-from-source inside the loop,
    NaN outside (exterior extrapolation is out of scope)."""

    interior_only = True

    def __init__(self, loop: BoundaryLoop, basis: SpectralBasis, source, bbox):
        self.loop = loop
        self.basis = basis
        self.bbox = bbox
        emb = basis.embedding()
        if np.isscalar(source) or isinstance(source, (int, np.integer)):
            self.source_embedding = emb[int(source)]
        else:
            self.source_embedding = mvc_weights(loop, np.asarray(source, float)) @ emb
        self._emb = emb

    def eval(self, pts, chunk=4096):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.full(len(pts), np.nan)
        inside = self.loop.contains(pts)
        idx = np.nonzero(inside)[0]
        for s in range(0, len(idx), chunk):
            sel = idx[s:s + chunk]
            w = _mvc_batch(self.loop.vertices, pts[sel], 0.0)
            out[sel] = np.linalg.norm(w @ self._emb - self.source_embedding, axis=1)
        return out
