"""Command-line driver.

Subcommands:
    gen     build a field for a catalog model and write a raw field file
    render  colour-map a raw field file into a binary PPM with isolines
    idf     interior distances from a source point, written as a raw field
    attr    render a heterogeneous object from an attribute scheme file
    trace   sphere-trace a 3D model into a shaded PPM

Exit codes: 0 on success, 2 on usage errors (unknown model/route/flags),
1 with a one-line diagnostic when a pipeline stage fails.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import attributes as attr_mod
from . import models, pipeline, rawfield, render
from .errors import FieldError
from .grid import ScalarGrid


def _build_parser():
    p = argparse.ArgumentParser(prog="hfrep", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    names = models.model_names()

    g = sub.add_parser("gen", help="generate a field and write a raw field file")
    g.add_argument("--model", required=True, choices=names)
    g.add_argument("--route", default="dt", choices=pipeline.ROUTES)
    g.add_argument("--res", type=int, default=257)
    g.add_argument("--out", required=True)
    g.add_argument("--sl", type=float, default=None, help="sigmoid slope")
    g.add_argument("--min-depth", type=int, default=3)
    g.add_argument("--max-depth", type=int, default=7)
    g.add_argument("--source", default=None, help="x,y source for the idf route")

    r = sub.add_parser("render", help="render a raw field file to PPM")
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--iso", type=float, default=0.05)
    r.add_argument("--out", required=True)
    r.add_argument("--width", type=int, default=None)
    r.add_argument("--height", type=int, default=None)

    i = sub.add_parser("idf", help="interior distance field from a source point")
    i.add_argument("--model", required=True, choices=names)
    i.add_argument("--source", required=True, help="x,y")
    i.add_argument("--res", type=int, default=129)
    i.add_argument("--out", required=True)

    a = sub.add_parser("attr", help="render a heterogeneous object scheme")
    a.add_argument("--model", required=True, choices=names)
    a.add_argument("--scheme", required=True, help="key=value scheme file")
    a.add_argument("--out", required=True)
    a.add_argument("--res", type=int, default=512)

    t = sub.add_parser("trace", help="sphere-trace a 3D model")
    t.add_argument("--model", required=True, choices=names)
    t.add_argument("--out", required=True)
    t.add_argument("--res", type=int, default=97, help="field grid resolution")
    t.add_argument("--width", type=int, default=256)
    t.add_argument("--height", type=int, default=256)
    return p


def _parse_source(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise FieldError(f"bad source point {text!r}, expected x,y") from exc
    return np.array([x, y])


def _sample_idf(field, res):
    g = ScalarGrid((res, res), field.bbox)
    pts = g.node_coords().reshape(-1, 2)
    vals = field.eval(pts)
    interior = np.isfinite(vals)
    if not interior.any():
        raise FieldError("interior distance field is empty")
    fill = -0.05 * float(vals[interior].max())
    vals[~interior] = fill
    g.values = vals.reshape(g.dims)
    return g


def cmd_gen(args):
    bbox = models.model_bbox(args.model)
    tree = models.build_model(args.model)
    source = _parse_source(args.source) if args.source else None
    field = pipeline.hfrep_build(
        tree, args.route, bbox, res=args.res, s_l=args.sl,
        min_depth=args.min_depth, max_depth=args.max_depth, source=source)
    if args.route == "idf":
        grid_out = _sample_idf(field, args.res)
    else:
        grid_out = field.sample((args.res,) * bbox.dim)
    rawfield.write_hfrf(grid_out, args.out)
    if args.route == "hfim-adf":
        print(field.adf_tree.dump_stats())
    print(f"wrote {args.out}")
    return 0


def cmd_render(args):
    g = rawfield.read_hfrf(args.infile)
    if g.dim != 2:
        raise FieldError("render expects a 2D raw field; use trace for 3D models")
    width = args.width or g.dims[0]
    height = args.height or g.dims[1]
    img = render.render_field(g, width=width, height=height, iso_step=args.iso)
    img.to_ppm(args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_idf(args):
    bbox = models.model_bbox(args.model)
    tree = models.build_model(args.model)
    field = pipeline.hfrep_build(tree, "idf", bbox, res=args.res,
                                 source=_parse_source(args.source))
    rawfield.write_hfrf(_sample_idf(field, args.res), args.out)
    print(f"wrote {args.out}")
    return 0


def _parse_scheme(path):
    entries = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FieldError(f"bad scheme line {raw.strip()!r}, expected key = value")
            key, val = (part.strip() for part in line.split("=", 1))
            entries.append((key, val))
    return entries


def _scheme_to_object(entries, geometry):
    opts = {"route": "dt", "res": 257, "sl": None}
    bands = []
    attrs = {}
    exterior = (0.08, 0.08, 0.16)
    for key, val in entries:
        if key in ("route", "res", "sl"):
            opts[key] = val
        elif key == "exterior":
            exterior = tuple(float(v) for v in val.split())
        elif key == "band":
            lo, hi, idx = val.split()
            bands.append((float(lo), float(hi), int(idx)))
        elif key.startswith("attr"):
            attrs[int(key[4:])] = val
        else:
            raise FieldError(f"unknown scheme key {key!r}")
    fns = []
    for idx in sorted(attrs):
        parts = attrs[idx].split()
        kind = parts[0]
        if kind == "color":
            fns.append(attr_mod.AttributeFn("constant_color",
                                            color=tuple(float(v) for v in parts[1:4])))
        elif kind == "wood":
            c, freq, seed = float(parts[1]), float(parts[2]), int(parts[3])
            cols = [float(v) for v in parts[4:10]] or [0.55, 0.35, 0.2, 0.25, 0.12, 0.05]
            fns.append(attr_mod.AttributeFn("wood", c=c, base_frequency=freq, seed=seed,
                                            color=tuple(cols[0:3]), color2=tuple(cols[3:6])))
        elif kind == "slabs":
            dim = geometry.bbox.dim
            vals = [float(v) for v in parts[1:1 + 3 * dim]]
            fns.append(attr_mod.AttributeFn("slabs", frequency=vals[0:dim],
                                            phase=vals[dim:2 * dim],
                                            threshold=vals[2 * dim:3 * dim]))
        else:
            raise FieldError(f"unknown attribute kind {kind!r}")
    if not fns:
        raise FieldError("scheme declares no attributes")
    scheme = attr_mod.PartitionScheme(bands=bands or None)
    return attr_mod.HeterogeneousObject(geometry, fns, scheme, exterior), opts


def cmd_attr(args):
    entries = _parse_scheme(args.scheme)
    opts = dict(entries)
    bbox = models.model_bbox(args.model)
    tree = models.build_model(args.model)
    route = opts.get("route", "dt")
    res = int(opts.get("res", 257))
    sl = float(opts["sl"]) if "sl" in opts else None
    geometry = pipeline.hfrep_build(tree, route, bbox, res=res, s_l=sl)
    obj, _ = _scheme_to_object(entries, geometry)
    d_samples = geometry.sample((129,) * 2).values
    obj.partitions.validate(len(obj.attributes), float(d_samples.max()))

    n = args.res
    xs = np.linspace(bbox.lo[0], bbox.hi[0], n)
    ys = np.linspace(bbox.lo[1], bbox.hi[1], n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X, Y], axis=-1).reshape(-1, 2)
    _, _, rgb = obj.evaluate(pts)
    img = np.transpose(rgb.reshape(n, n, 3), (1, 0, 2))[::-1]
    render.FieldImage((img * 255).round().astype(np.uint8)).to_ppm(args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_trace(args):
    bbox = models.model_bbox(args.model)
    if bbox.dim != 3:
        raise FieldError(f"model {args.model!r} is 2D; trace needs a 3D model")
    tree = models.build_model(args.model)
    field = pipeline.hfrep_build(tree, "dt", bbox, res=args.res)
    img = render.sphere_trace(field, width=args.width, height=args.height)
    img.to_ppm(args.out)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "gen": cmd_gen,
    "render": cmd_render,
    "idf": cmd_idf,
    "attr": cmd_attr,
    "trace": cmd_trace,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (FieldError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
