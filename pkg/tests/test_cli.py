import subprocess
import sys

import numpy as np
import pytest

from hfrep import frep, models, rawfield, render
from hfrep.grid import square


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "hfrep.cli", *args],
                          capture_output=True, text=True)


def test_gen_and_render_round_trip(tmp_path):
    field = tmp_path / "disc.hfrf"
    image = tmp_path / "disc.ppm"
    r = run_cli("gen", "--model", "disc", "--route", "dt", "--res", "129",
                "--out", str(field))
    assert r.returncode == 0, r.stderr
    g = rawfield.read_hfrf(field)
    assert g.dims == (129, 129)
    r = run_cli("render", "--in", str(field), "--iso", "0.05", "--out", str(image))
    assert r.returncode == 0, r.stderr
    img = render.FieldImage.from_ppm(image)
    assert img.width == 129 and img.height == 129


def test_gen_routes(tmp_path):
    for route, extra in (("fim", []), ("hfim-adf", ["--min-depth", "2", "--max-depth", "6"])):
        out = tmp_path / f"{route}.hfrf"
        r = run_cli("gen", "--model", "disc", "--route", route, "--res", "129",
                    "--out", str(out), *extra)
        assert r.returncode == 0, r.stderr
    assert "leaves" in run_cli("gen", "--model", "disc", "--route", "hfim-adf",
                               "--res", "65", "--max-depth", "6",
                               "--out", str(tmp_path / "t.hfrf")).stdout


def test_cross_route_consistency(tmp_path):
    a = tmp_path / "a.hfrf"
    b = tmp_path / "b.hfrf"
    assert run_cli("gen", "--model", "disc", "--route", "dt", "--res", "129",
                   "--out", str(a)).returncode == 0
    assert run_cli("gen", "--model", "disc", "--route", "fim", "--res", "129",
                   "--out", str(b)).returncode == 0
    ga = rawfield.read_hfrf(a)
    gb = rawfield.read_hfrf(b)
    h = ga.spacing[0]
    assert np.max(np.abs(ga.values - gb.values)) <= 2 * h


def test_idf_command(tmp_path):
    out = tmp_path / "idf.hfrf"
    r = run_cli("idf", "--model", "star", "--source", "0,0", "--res", "97",
                "--out", str(out))
    assert r.returncode == 0, r.stderr
    g = rawfield.read_hfrf(out)
    assert np.isfinite(g.values).all()
    assert g.values.max() > 0 and g.values.min() < 0   # exterior fill is negative


def test_attr_command(tmp_path):
    scheme = tmp_path / "scheme.txt"
    scheme.write_text(
        "route = dt\n"
        "res = 129\n"
        "exterior = 0.1 0.1 0.2\n"
        "band = 0.0 0.1 0\n"
        "band = 0.1 0.25 1\n"
        "band = 0.25 1e9 2\n"
        "attr0 = color 0.9 0.2 0.2\n"
        "attr1 = wood 3.0 30.0 7\n"
        "attr2 = color 0.2 0.4 0.9\n")
    out = tmp_path / "attr.ppm"
    r = run_cli("attr", "--model", "star", "--scheme", str(scheme),
                "--out", str(out), "--res", "200")
    assert r.returncode == 0, r.stderr
    img = render.FieldImage.from_ppm(out)
    # all three bands and the exterior appear
    px = img.pixels.reshape(-1, 3)
    uniq = {tuple(c) for c in np.unique(px, axis=0)}
    assert (230, 51, 51) in uniq          # attr0 colour
    assert (26, 26, 51) in uniq           # exterior
    assert len(uniq) > 4                  # wood band varies


def test_trace_command(tmp_path):
    out = tmp_path / "sphere.ppm"
    r = run_cli("trace", "--model", "sphere3d", "--res", "65",
                "--width", "48", "--height", "48", "--out", str(out))
    assert r.returncode == 0, r.stderr
    img = render.FieldImage.from_ppm(out)
    assert img.pixels[24, 24].max() > 0    # sphere in the middle
    assert img.pixels[0, 0].max() == 0     # background in the corner


def test_usage_errors_exit_2(tmp_path):
    assert run_cli("gen", "--model", "nonesuch", "--out", "x.hfrf").returncode == 2
    assert run_cli("gen", "--model", "disc", "--route", "bogus",
                   "--out", "x.hfrf").returncode == 2
    assert run_cli("gen", "--model", "disc", "--frobnicate").returncode == 2
    assert run_cli("bogus-command").returncode == 2


def test_module_errors_exit_1(tmp_path):
    missing = tmp_path / "missing.hfrf"
    r = run_cli("render", "--in", str(missing), "--out", str(tmp_path / "x.ppm"))
    assert r.returncode == 1
    assert r.stderr.strip().startswith("error:")
    assert len(r.stderr.strip().splitlines()) == 1
    # trace on a 2D model is a pipeline error, one-line diagnostic
    r = run_cli("trace", "--model", "disc", "--out", str(tmp_path / "y.ppm"))
    assert r.returncode == 1
    assert "3D" in r.stderr


def test_sign_classification_vs_frep_grid(tmp_path):
    # small-scale version of the acceptance check on the bat model
    field = tmp_path / "bat.hfrf"
    image = tmp_path / "bat.ppm"
    assert run_cli("gen", "--model", "bat", "--route", "dt", "--res", "257",
                   "--out", str(field)).returncode == 0
    assert run_cli("render", "--in", str(field), "--iso", "0.05",
                   "--out", str(image)).returncode == 0
    img = render.FieldImage.from_ppm(image)
    cls = render.classify_pixels(img)
    n = img.width
    bbox = models.model_bbox("bat")
    xs = np.linspace(bbox.lo[0], bbox.hi[0], n + 1)
    cx = 0.5 * (xs[:-1] + xs[1:])
    X, Y = np.meshgrid(cx, cx, indexing="ij")
    fr = models.build_model("bat").eval(np.stack([X, Y], -1).reshape(-1, 2)).reshape(n, n)
    fr_img = np.transpose(fr)[::-1]
    scale = np.abs(fr_img).max()
    agree = ((cls == 1) & (fr_img > 0)) | ((cls == -1) & (fr_img < 0)) \
        | ((cls == 0) & (np.abs(fr_img) < 0.05 * scale))
    assert agree.mean() >= 0.995
