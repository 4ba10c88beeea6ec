"""Field renderers: signed-field colour maps with isolines (2D) and a CPU
sphere tracer for 3D fields.

Colour convention: blue ramp for negative values, black band around zero
(one isoline step wide), yellow ramp for positive values.  A pixel is an
isoline pixel when the field values at its corners straddle a multiple
of the isoline step; isoline pixels keep their hue but are darkened, so
sign classification survives.

Sphere tracing steps each ray by |field| (valid when the field does not
exceed the true distance, which the assembled fields guarantee up to
interpolation error; a bisection refinement absorbs that error).  Rays
march only inside the field's bounding box.  The tracer refuses fields
that fail a sampled Lipschitz bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FieldError
from .grid import ScalarGrid

_ISO_DARKEN = 0.4
_RAMP_LO = 70.0
_RAMP_SPAN = 185.0


@dataclass
class FieldImage:
    pixels: np.ndarray  # (height, width, 3) uint8, row 0 = top

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    def to_ppm(self, path):
        with open(path, "wb") as fh:
            fh.write(f"P6\n{self.width} {self.height}\n255\n".encode())
            fh.write(self.pixels.tobytes())

    @classmethod
    def from_ppm(cls, path):
        with open(path, "rb") as fh:
            data = fh.read()
        if not data.startswith(b"P6"):
            raise FieldError("not a binary PPM (P6) file")
        fields = []
        pos = 2
        while len(fields) < 3:
            while pos < len(data) and data[pos:pos + 1].isspace():
                pos += 1
            if data[pos:pos + 1] == b"#":
                while data[pos:pos + 1] != b"\n":
                    pos += 1
                continue
            start = pos
            while not data[pos:pos + 1].isspace():
                pos += 1
            fields.append(int(data[start:pos]))
        pos += 1
        w, h, maxval = fields
        if maxval != 255:
            raise FieldError("only 8-bit PPM supported")
        pix = np.frombuffer(data[pos:pos + w * h * 3], dtype=np.uint8)
        return cls(pix.reshape(h, w, 3).copy())


def _corner_values(field, width, height, bbox):
    xs = np.linspace(bbox.lo[0], bbox.hi[0], width + 1)
    ys = np.linspace(bbox.lo[1], bbox.hi[1], height + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X, Y], axis=-1).reshape(-1, 2)
    if isinstance(field, ScalarGrid):
        vals = field.sample(pts)
    else:
        vals = field.eval(pts)
    return vals.reshape(width + 1, height + 1)


def render_field(field, width=512, height=512, iso_step=0.05, bbox=None) -> FieldImage:
    """Colour-mapped field with isolines at multiples of iso_step."""
    if iso_step <= 0:
        raise ValueError("isoline step must be positive")
    bbox = bbox if bbox is not None else field.bbox
    corners = _corner_values(field, width, height, bbox)
    finite = np.isfinite(corners)
    c00 = corners[:-1, :-1]
    c10 = corners[1:, :-1]
    c01 = corners[:-1, 1:]
    c11 = corners[1:, 1:]
    stack = np.stack([c00, c10, c01, c11])
    with np.errstate(invalid="ignore"):
        vmin = np.nanmin(stack, axis=0)
        vmax = np.nanmax(stack, axis=0)
        v = np.nanmean(stack, axis=0)
    valid = np.isfinite(v)

    rgb = np.zeros(v.shape + (3,))
    neg_scale = max(float(-np.nanmin(v[valid], initial=0.0)), 1e-12)
    pos_scale = max(float(np.nanmax(v[valid], initial=0.0)), 1e-12)
    neg = valid & (v < 0)
    pos = valid & (v >= 0)
    t = np.minimum(1.0, -v[neg] / neg_scale)
    rgb[neg, 2] = _RAMP_LO + _RAMP_SPAN * t
    t = np.minimum(1.0, v[pos] / pos_scale)
    rgb[pos, 0] = _RAMP_LO + _RAMP_SPAN * t
    rgb[pos, 1] = _RAMP_LO + _RAMP_SPAN * t

    band = valid & (np.abs(v) <= 0.5 * iso_step)
    rgb[band] = 0.0

    with np.errstate(invalid="ignore"):
        iso = valid & (np.floor(vmin / iso_step) != np.floor(vmax / iso_step))
    iso &= ~band
    rgb[iso] *= _ISO_DARKEN

    # image rows run top to bottom; value lattice is (x, y) with y up
    img = np.transpose(rgb, (1, 0, 2))[::-1]
    return FieldImage(np.clip(np.round(img), 0, 255).astype(np.uint8))


def classify_pixels(image: FieldImage):
    """Per-pixel sign class from colour: +1 positive, -1 negative, 0 the
    near-zero band / unknown."""
    px = image.pixels.astype(np.int64)
    r, g, b = px[..., 0], px[..., 1], px[..., 2]
    out = np.zeros(px.shape[:2], dtype=np.int64)
    out[(b > r + 10)] = -1
    out[(r > b + 10) & (g > b + 10)] = 1
    dark = px.max(axis=-1) < 30
    out[dark] = 0
    return out


def isoline_mask(image: FieldImage):
    """Pixels rendered as (darkened) isolines or the zero band."""
    px = image.pixels.astype(np.int64)
    mx = px.max(axis=-1)
    dark = mx < 30
    iso = (mx >= 30) & (mx <= int(255 * _ISO_DARKEN) + 1)
    return iso | dark


def isoline_break_count(mask):
    """Endpoint count of the isoline pixel set: pixels with fewer than two
    8-neighbours in the set.  Closed smooth isolines contribute none."""
    m = mask.astype(np.int64)
    padded = np.pad(m, 1)
    neigh = np.zeros_like(m)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neigh += padded[1 + di:1 + di + m.shape[0], 1 + dj:1 + dj + m.shape[1]]
    return int(np.sum(mask & (neigh < 2)))


# ---------------------------------------------------------------------------
# Sphere tracing
# ---------------------------------------------------------------------------

@dataclass
class Camera:
    eye: tuple = (0.0, 0.0, -3.0)
    target: tuple = (0.0, 0.0, 0.0)
    up: tuple = (0.0, 1.0, 0.0)
    fov_deg: float = 40.0

    def rays(self, width, height):
        eye = np.asarray(self.eye, dtype=float)
        fwd = np.asarray(self.target, dtype=float) - eye
        fwd /= np.linalg.norm(fwd)
        right = np.cross(fwd, np.asarray(self.up, dtype=float))
        right /= np.linalg.norm(right)
        up = np.cross(right, fwd)
        half = np.tan(np.radians(self.fov_deg) / 2.0)
        xs = (np.arange(width) + 0.5) / width * 2.0 - 1.0
        ys = 1.0 - (np.arange(height) + 0.5) / height * 2.0
        px, py = np.meshgrid(xs * half * width / height, ys * half, indexing="xy")
        dirs = (fwd[None, None, :] + px[..., None] * right[None, None, :]
                + py[..., None] * up[None, None, :])
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        return eye, dirs.reshape(-1, 3)


def lipschitz_estimate(field, samples_per_axis=17):
    """Max sampled two-point quotient |f(a) - f(b)| / |a - b| over axis and
    diagonal neighbour pairs of an interior lattice.

    This is the quantity that bounds how much a march step can overshoot
    and the certificate sphere tracing checks; the pointwise gradient
    norm of any cubic interpolant of cone-shaped distance data spikes to
    4/3 inside the cells that contain the distance crease, which says
    nothing about step safety.
    """
    bbox = field.bbox
    margin = 1e-6 * bbox.extent
    axes = [np.linspace(bbox.lo[a] + margin[a], bbox.hi[a] - margin[a], samples_per_axis)
            for a in range(bbox.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    vals = field.eval(np.stack(mesh, axis=-1).reshape(-1, bbox.dim))
    vals = vals.reshape([samples_per_axis] * bbox.dim)
    h = np.array([ax[1] - ax[0] for ax in axes])
    worst = 0.0
    dim = bbox.dim
    offsets = []
    for code in range(3 ** dim):
        d = []
        c = code
        for _ in range(dim):
            d.append(c % 3 - 1)
            c //= 3
        first = next((v for v in d if v != 0), 0)
        if first > 0:
            offsets.append(d)
    for off in offsets:
        sl_a = tuple(slice(None, -1) if o > 0 else slice(1, None) if o < 0 else slice(None)
                     for o in off)
        sl_b = tuple(slice(1, None) if o > 0 else slice(None, -1) if o < 0 else slice(None)
                     for o in off)
        dist = float(np.linalg.norm(h * np.array(off)))
        q = np.abs(vals[sl_b] - vals[sl_a]) / dist
        worst = max(worst, float(q.max()))
    return worst


def _ray_box(origin, dirs, lo, hi):
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (lo[None, :] - origin[None, :]) / dirs
        t2 = (hi[None, :] - origin[None, :]) / dirs
    tmin = np.nanmax(np.minimum(t1, t2), axis=1)
    tmax = np.nanmin(np.maximum(t1, t2), axis=1)
    return tmin, tmax


def trace_rays(field, origin, dirs, tol=1e-4, max_steps=256):
    """March rays by |field| until |value| < tol; returns (hit, depth).

    A sign flip (stepping into the object by at most the interpolation
    error) is resolved by bisection between the last two samples.
    """
    origin = np.asarray(origin, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    n = len(dirs)
    eps = 1e-9 * field.bbox.diagonal()
    shrink = 1e-7 * field.bbox.extent
    lo = field.bbox.lo + shrink
    hi = field.bbox.hi - shrink
    t_in, t_out = _ray_box(origin, dirs, lo, hi)
    t = np.maximum(t_in, 0.0) + eps
    alive = t < t_out
    hit = np.zeros(n, dtype=bool)
    depth = np.full(n, np.inf)
    t_prev = t.copy()
    min_step = 1e-6 * field.bbox.diagonal()
    for _ in range(max_steps):
        if not alive.any():
            break
        idx = np.nonzero(alive)[0]
        p = origin[None, :] + t[idx, None] * dirs[idx]
        v = field.eval(p)
        close = np.abs(v) < tol
        hit[idx[close]] = True
        depth[idx[close]] = t[idx[close]]
        alive[idx[close]] = False
        crossed = (v > 0) & ~close
        if crossed.any():
            ci = idx[crossed]
            t_lo = t_prev[ci]
            t_hi = t[ci]
            for _ in range(60):
                mid = 0.5 * (t_lo + t_hi)
                vm = field.eval(origin[None, :] + mid[:, None] * dirs[ci])
                inside = vm > 0
                t_hi = np.where(inside, mid, t_hi)
                t_lo = np.where(inside, t_lo, mid)
            hit[ci] = True
            depth[ci] = 0.5 * (t_lo + t_hi)
            alive[ci] = False
        step_idx = idx[~close & ~crossed]
        if len(step_idx):
            sv = -v[~close & ~crossed]
            t_prev[step_idx] = t[step_idx]
            t[step_idx] += np.maximum(sv, min_step)
            dead = t[step_idx] > t_out[step_idx]
            alive[step_idx[dead]] = False
    return hit, depth


def sphere_trace(field, width=256, height=256, camera: Camera = None,
                 tol=1e-4, max_steps=256, lipschitz_bound=1.1,
                 check_lipschitz=True) -> FieldImage:
    """Shaded rendering of a 3D field's zero surface."""
    if field.bbox.dim != 3:
        raise ValueError("sphere tracing needs a 3D field")
    if check_lipschitz:
        lip = lipschitz_estimate(field)
        if lip > lipschitz_bound:
            raise FieldError(
                f"field fails the Lipschitz precheck: sampled bound {lip:.3f} "
                f"exceeds {lipschitz_bound}; sphere tracing would overshoot")
    camera = camera if camera is not None else Camera()
    origin, dirs = camera.rays(width, height)
    hit, depth = trace_rays(field, origin, dirs, tol=tol, max_steps=max_steps)
    img = np.zeros((height * width, 3))
    if hit.any():
        p = origin[None, :] + depth[hit, None] * dirs[hit]
        h_n = 1e-3 * field.bbox.diagonal()
        normal = np.zeros_like(p)
        for a in range(3):
            e = np.zeros(3)
            e[a] = h_n
            pa = np.clip(p + e, field.bbox.lo + 2e-7 * field.bbox.extent,
                         field.bbox.hi - 2e-7 * field.bbox.extent)
            pb = np.clip(p - e, field.bbox.lo + 2e-7 * field.bbox.extent,
                         field.bbox.hi - 2e-7 * field.bbox.extent)
            normal[:, a] = field.eval(pa) - field.eval(pb)
        # field is positive inside, so the outward normal is -gradient
        normal = -normal
        normal /= np.maximum(np.linalg.norm(normal, axis=1, keepdims=True), 1e-30)
        light = np.array([0.35, 0.65, -0.67])
        light /= np.linalg.norm(light)
        lamb = np.clip(normal @ light, 0.0, 1.0)
        shade = 0.18 + 0.78 * lamb
        base = np.array([0.92, 0.86, 0.70])
        img[hit] = np.clip(shade[:, None] * base[None, :], 0.08, 1.0)
    return FieldImage((img.reshape(height, width, 3) * 255).round().astype(np.uint8))
