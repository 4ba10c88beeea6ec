import numpy as np
import pytest

from hfrep import DomainError
from hfrep.grid import BoundingBox, ContinuityClass, ScalarGrid, square


def test_bbox_validation():
    with pytest.raises(ValueError):
        BoundingBox(np.array([0.0, 0.0]), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        BoundingBox(np.array([0.0, np.nan]), np.array([1.0, 1.0]))
    b = square(2.0)
    assert b.dim == 2
    assert b.diagonal() == pytest.approx(np.sqrt(32.0))


def test_continuity_ordering():
    assert ContinuityClass.C0 < ContinuityClass.C1 < ContinuityClass.CInf


def test_world_to_grid_corners_and_centre():
    g = ScalarGrid((65, 65), square(1.0))
    assert np.allclose(g.world_to_grid(g.bbox.lo), [0.0, 0.0])
    assert np.allclose(g.world_to_grid(g.bbox.hi), [64.0, 64.0])
    assert np.allclose(g.world_to_grid(g.bbox.center()), [32.0, 32.0])


def test_round_trip_world_grid(rng):
    g = ScalarGrid((33, 17), BoundingBox(np.array([-2.0, 1.0]), np.array([3.0, 4.0])))
    pts = rng.uniform([-2, 1], [3, 4], size=(1000, 2))
    back = g.grid_to_world(g.world_to_grid(pts))
    assert np.max(np.abs(back - pts) / np.maximum(np.abs(pts), 1.0)) < 1e-12


def test_sample_constant_and_nodes(rng):
    g = ScalarGrid((9, 9), square(1.0), np.full((9, 9), 4.5))
    pts = rng.uniform(-1, 1, size=(200, 2))
    assert np.allclose(g.sample(pts), 4.5)
    g2 = ScalarGrid((9, 9), square(1.0), rng.standard_normal((9, 9)))
    nodes = g2.node_coords().reshape(-1, 2)
    assert np.allclose(g2.sample(nodes), g2.values.ravel(), atol=1e-13)


def test_sample_linear_precision(rng):
    g = ScalarGrid((13, 9), square(1.0))
    coords = g.node_coords()
    a = np.array([0.7, -1.3])
    g.values = coords @ a + 0.4
    pts = rng.uniform(-1, 1, size=(1000, 2))
    assert np.max(np.abs(g.sample(pts) - (pts @ a + 0.4))) < 1e-12


def test_sample_matches_direct_formula(rng):
    g = ScalarGrid((8, 8), square(1.0), rng.standard_normal((8, 8)))
    pts = rng.uniform(-1, 1, size=(100, 2))
    h = g.spacing
    fi = (pts - g.bbox.lo) / h
    c = np.clip(np.floor(fi).astype(int), 0, 6)
    t = fi - c
    v = g.values
    direct = (v[c[:, 0], c[:, 1]] * (1 - t[:, 0]) * (1 - t[:, 1])
              + v[c[:, 0] + 1, c[:, 1]] * t[:, 0] * (1 - t[:, 1])
              + v[c[:, 0], c[:, 1] + 1] * (1 - t[:, 0]) * t[:, 1]
              + v[c[:, 0] + 1, c[:, 1] + 1] * t[:, 0] * t[:, 1])
    assert np.max(np.abs(g.sample(pts) - direct)) < 1e-14


def test_sample_outside_raises():
    g = ScalarGrid((9, 9), square(1.0))
    with pytest.raises(DomainError):
        g.sample(np.array([1.5, 0.0]))


def test_trilinear_3d(rng):
    g = ScalarGrid((7, 8, 9), square(1.0, dim=3))
    coords = g.node_coords()
    a = np.array([0.3, -0.8, 1.1])
    g.values = coords @ a - 2.0
    pts = rng.uniform(-1, 1, size=(500, 3))
    assert np.max(np.abs(g.sample(pts) - (pts @ a - 2.0))) < 1e-12


def test_gradient_linear_exact():
    g = ScalarGrid((11, 11), square(1.0))
    g.values = g.node_coords()[..., 0]
    for idx in [(5, 5), (1, 9), (0, 0), (10, 10)]:
        assert np.allclose(g.gradient(idx), [1.0, 0.0], atol=1e-13)
    g.values = np.zeros((11, 11)) + 3.0
    assert np.allclose(g.gradient((4, 7)), [0.0, 0.0])


def test_gradient_central_exact_for_quadratic():
    # f(x) = x^2 sampled with h=0.1 around x=0.5: central difference is exact
    g = ScalarGrid((21, 3), BoundingBox(np.array([-0.5, 0.0]), np.array([1.5, 0.2])))
    coords = g.node_coords()
    g.values = coords[..., 0] ** 2
    i = int(round((0.5 - (-0.5)) / g.spacing[0]))
    assert g.grid_to_world((i, 0))[0] == pytest.approx(0.5)
    assert g.gradient((i, 1))[0] == pytest.approx(1.0, abs=1e-13)
