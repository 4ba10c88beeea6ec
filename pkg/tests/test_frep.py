import numpy as np
import pytest

from hfrep import frep
from hfrep.grid import ContinuityClass, square


# ---------------------------------------------------------------------------
# R-function systems
# ---------------------------------------------------------------------------

def test_r1_values():
    assert frep.r_union(3.0, 4.0) == pytest.approx(12.0)
    assert frep.r_union(0.0, 0.0) == 0.0
    assert frep.r_intersect(3.0, 4.0) == pytest.approx(2.0)


def test_rv_branch_values():
    # the four closed-form branches of the C^(n-1) system, n=2
    assert frep.rv_intersect(3.0, 4.0) == pytest.approx(12.0 / 5.0)
    assert frep.rv_intersect(-3.0, 4.0) == pytest.approx(-3.0)
    assert frep.rv_intersect(4.0, -3.0) == pytest.approx(-3.0)
    assert frep.rv_intersect(-3.0, -4.0) == pytest.approx(-5.0)
    assert frep.rv_union(3.0, 4.0) == pytest.approx(5.0)
    assert frep.rv_union(-3.0, 4.0) == pytest.approx(4.0)
    assert frep.rv_union(4.0, -3.0) == pytest.approx(4.0)
    assert frep.rv_union(-3.0, -4.0) == pytest.approx(-12.0 / 5.0)
    assert frep.rv_union(0.0, 0.0) == 0.0
    assert frep.rv_intersect(0.0, 0.0) == 0.0


def test_rv_branch_formulas_on_interior_samples(rng):
    n = 2
    f1 = rng.uniform(0.1, 5.0, 2000)
    f2 = rng.uniform(0.1, 5.0, 2000)
    assert np.allclose(frep.rv_union(f1, f2), (f1 ** n + f2 ** n) ** (1 / n))
    assert np.allclose(frep.rv_intersect(f1, f2), f1 * f2 * (f1 ** n + f2 ** n) ** (-1 / n))
    assert np.allclose(frep.rv_union(-f1, -f2), -f1 * f2 * (f1 ** n + f2 ** n) ** (-1 / n))
    assert np.allclose(frep.rv_intersect(-f1, -f2), -(f1 ** n + f2 ** n) ** (1 / n))
    assert np.allclose(frep.rv_union(-f1, f2), f2)
    assert np.allclose(frep.rv_intersect(-f1, f2), -f1)


def _sign_class(x):
    return np.sign(x)


def test_sign_equivalence_million_pairs(rng):
    f1 = rng.standard_normal(10 ** 6) * 3.0
    f2 = rng.standard_normal(10 ** 6) * 3.0
    assert np.array_equal(_sign_class(frep.r_union(f1, f2)),
                          _sign_class(np.maximum(f1, f2)))
    assert np.array_equal(_sign_class(frep.r_intersect(f1, f2)),
                          _sign_class(np.minimum(f1, f2)))
    assert np.array_equal(_sign_class(frep.rv_union(f1, f2)),
                          _sign_class(np.maximum(f1, f2)))
    assert np.array_equal(_sign_class(frep.rv_intersect(f1, f2)),
                          _sign_class(np.minimum(f1, f2)))


def test_commutativity(rng):
    a = rng.standard_normal(5000)
    b = rng.standard_normal(5000)
    assert np.array_equal(frep.r_union(a, b), frep.r_union(b, a))
    assert np.array_equal(frep.r_intersect(a, b), frep.r_intersect(b, a))
    assert np.allclose(frep.rv_union(a, b), frep.rv_union(b, a), rtol=0, atol=1e-14)
    assert np.allclose(frep.rv_intersect(a, b), frep.rv_intersect(b, a), rtol=0, atol=1e-14)


def _derivative_jump(f, t0, step):
    right = (f(t0 + step) - f(t0)) / step
    left = (f(t0) - f(t0 - step)) / step
    return abs(right - left)


def test_rv_seam_continuity_vs_r1_corner_jump():
    """The piecewise system joins C1 across its branch seams (f1=0 or
    f2=0), while the sqrt system keeps an O(1) derivative jump at the
    corner f1=f2=0; at that same corner the rv jump is markedly smaller."""
    step = 1e-6
    for c in (0.7, -0.7):
        for op in (frep.rv_union, frep.rv_intersect):
            jump1 = _derivative_jump(lambda t: op(t, c), 0.0, step)
            jump2 = _derivative_jump(lambda t: op(c, t), 0.0, step)
            assert jump1 < 10 * step
            assert jump2 < 10 * step
    # corner crossing along the diagonal
    r1_jump = _derivative_jump(lambda t: frep.r_union(t, t), 0.0, step)
    rv_jump = _derivative_jump(lambda t: frep.rv_union(t, t), 0.0, step)
    assert r1_jump > 1.0                      # O(1) defect
    assert rv_jump < 0.5 * r1_jump            # strictly milder at the corner


# ---------------------------------------------------------------------------
# Primitives and trees
# ---------------------------------------------------------------------------

def test_circle_membership():
    c = frep.Circle(0.0, 0.0, 1.0)
    assert c.eval(np.array([0.0, 0.0])) == pytest.approx(1.0)
    assert c.eval(np.array([1.0, 0.0])) == pytest.approx(0.0)
    assert c.eval(np.array([2.0, 0.0])) < 0


def test_triangle_orientation_independent():
    t1 = frep.Triangle2D((0, 0), (1, 0), (0, 1))
    t2 = frep.Triangle2D((0, 0), (0, 1), (1, 0))
    p = np.array([0.2, 0.2])
    assert t1.eval(p) == pytest.approx(t2.eval(p))
    assert t1.eval(p) > 0
    assert t1.eval(np.array([1.0, 1.0])) < 0


def test_transform_roundtrip(rng):
    base = frep.Rectangle(0.0, 0.0, 0.4, 0.2)
    moved = frep.Transform(base, translate=(0.3, -0.1), rotate=0.7, scale=1.5)
    pts = rng.uniform(-1, 1, size=(200, 2))
    c, s = np.cos(0.7), np.sin(0.7)
    rot = np.array([[c, -s], [s, c]])
    fwd = (pts * 1.5) @ rot.T + np.array([0.3, -0.1])
    assert np.allclose(moved.eval(fwd), base.eval(pts), atol=1e-12)


def test_subtract_equals_intersect_with_negation(rng):
    a = frep.Circle(0.0, 0.0, 0.8)
    b = frep.Circle(0.3, 0.0, 0.4)
    sub = frep.BinaryOp("subtract_r1", a, b)
    pts = rng.uniform(-1, 1, size=(500, 2))
    expected = frep.r_intersect(a.eval(pts), -b.eval(pts))
    assert np.allclose(sub.eval(pts), expected, atol=1e-14)


def test_continuity_class():
    s1 = frep.Sphere(0, 0, 0, 1.0)
    s2 = frep.Sphere(0.5, 0, 0, 1.0)
    assert frep.continuity_class(s1) == ContinuityClass.CInf
    assert frep.continuity_class(frep.BinaryOp("union_r1", s1, s2)) == ContinuityClass.C0
    assert frep.continuity_class(frep.BinaryOp("union_rv", s1, s2)) == ContinuityClass.C1
    assert frep.continuity_class(frep.BinaryOp("union_max", s1, s2)) == ContinuityClass.C0
    rect = frep.Rectangle(0, 0, 1, 1)
    tree = frep.BinaryOp("union_rv", rect, frep.Circle(0, 0, 1.0))
    assert frep.continuity_class(tree) == ContinuityClass.C0  # rectangle corners


def _tree_walk_oracle(node, p):
    """Independent scalar re-derivation of the constructive evaluation."""
    if isinstance(node, frep.Circle):
        return node.r ** 2 - (p[0] - node.center[0]) ** 2 - (p[1] - node.center[1]) ** 2
    if isinstance(node, frep.Rectangle):
        return min(node.half[0] - abs(p[0] - node.center[0]),
                   node.half[1] - abs(p[1] - node.center[1]))
    if isinstance(node, frep.Triangle2D):
        best = np.inf
        for i in range(3):
            a = node.verts[i]
            b = node.verts[(i + 1) % 3]
            e = b - a
            n = np.array([-e[1], e[0]])
            n = n / np.linalg.norm(n)
            best = min(best, (p[0] - a[0]) * n[0] + (p[1] - a[1]) * n[1])
        return best
    if isinstance(node, frep.BinaryOp):
        l = _tree_walk_oracle(node.left, p)
        r = _tree_walk_oracle(node.right, p)
        if node.kind == "union_r1":
            return l + r + np.sqrt(l * l + r * r)
        if node.kind == "intersect_r1":
            return l + r - np.sqrt(l * l + r * r)
        if node.kind == "subtract_r1":
            return l - r - np.sqrt(l * l + r * r)
        raise AssertionError(f"oracle does not cover {node.kind}")
    raise AssertionError(f"oracle does not cover {type(node)}")


def test_star_eval_matches_independent_oracle():
    from hfrep import models
    star = models.build_model("star")
    bbox = square(1.0)
    g = frep.sample_frep(star, (64, 64), bbox)
    coords = g.node_coords().reshape(-1, 2)
    oracle = np.array([_tree_walk_oracle(star, p) for p in coords])
    # 1e-14 relative: the nested unions amplify magnitudes to ~50, so the
    # tolerance scales with the values being compared
    scale = np.maximum(np.abs(oracle), 1.0)
    assert np.max(np.abs(g.values.ravel() - oracle) / scale) < 1e-14


def test_sample_frep_whole_box_rectangle_positive():
    bbox = square(1.0)
    g = frep.sample_frep(frep.Rectangle(0, 0, 2.0, 2.0), (17, 17), bbox)
    assert np.all(g.values > 0)


def test_sample_frep_circle_sign_changes_near_analytic_zero():
    bbox = square(1.0)
    g = frep.sample_frep(frep.Circle(0, 0, 0.5), (65, 65), bbox)
    h = g.spacing[0]
    v = g.values
    coords = g.node_coords()
    for axis in range(2):
        sl1 = [slice(None)] * 2
        sl2 = [slice(None)] * 2
        sl1[axis] = slice(0, -1)
        sl2[axis] = slice(1, None)
        change = v[tuple(sl1)] * v[tuple(sl2)] < 0
        mids = 0.5 * (coords[tuple(sl1)] + coords[tuple(sl2)])
        r = np.linalg.norm(mids[change], axis=-1)
        assert np.all(np.abs(r - 0.5) <= h * np.sqrt(2))


def test_sexpr_round_trip(rng):
    from hfrep import models
    for name in ("star", "bat", "robot", "treble-clef", "heart", "slabsphere3d"):
        tree = models.build_model(name)
        back = frep.parse_sexpr(tree.to_sexpr())
        dim = tree.dim
        pts = rng.uniform(-1, 1, size=(100, dim))
        assert np.allclose(back.eval(pts), tree.eval(pts), atol=1e-12)
