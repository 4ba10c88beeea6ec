import numpy as np
import pytest

from hfrep import attributes, frep, models, pipeline
from hfrep.grid import square


# ---------------------------------------------------------------------------
# Slabs
# ---------------------------------------------------------------------------

def test_slab_component_values():
    # sin peak: nu=1, phi=0, l=0 at x = pi/2
    v = attributes.slabs(np.array([np.pi / 2, 0.0]), np.array([1.0, 0.0]),
                         np.array([0.0, 0.0]), np.array([0.0, 0.0]))
    assert v[0] == pytest.approx(1.0)
    # nu = 0 degenerates to the constant threshold
    v = attributes.slabs(np.array([0.3, -2.0]), np.array([0.0, 0.0]),
                         np.array([0.0, 0.0]), np.array([0.5, 0.5]))
    assert np.allclose(v, 0.5)


def test_slab_threshold_validated():
    with pytest.raises(ValueError):
        attributes.slabs(np.zeros(2), np.ones(2), np.zeros(2), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        attributes.SlabComponent(0, 1.0, 0.0, -1.0, dim=2)


def test_slab_count_by_root_counting_oracle():
    """Over x in [0, 2 pi k] the component sin(x) + l has exactly k
    positive intervals; count sign runs on a dense 1D sampling."""
    l = 0.5
    k = 7
    xs = np.linspace(0.0, 2 * np.pi * k, 200001)
    comp = np.sin(xs) + l
    pos = comp > 0
    rising = np.sum(pos[1:] & ~pos[:-1])    # one slab start per period
    assert rising == k
    # positive fraction of one period matches the arcsine width
    frac = pos.mean()
    expected = (np.pi - 2 * np.arcsin(-l)) / (2 * np.pi)
    assert frac == pytest.approx(expected, abs=1e-3)


def test_slab_composite_excludes_negative_components(rng):
    sphere = frep.Sphere(0, 0, 0, 1.0)
    slab = attributes.SlabComponent(axis=0, frequency=4.5, phase=0.0,
                                    threshold=0.35, dim=3)
    comp = attributes.slab_composite(sphere, [slab])
    pts = rng.uniform(-1, 1, size=(20000, 3))
    v = comp.eval(pts)
    inside_sphere = sphere.eval(pts) > 0
    slab_neg = slab.eval(pts) < 0
    assert np.all(v[inside_sphere & slab_neg] <= 0)
    # sign equivalence with the min() composite
    vmin = np.minimum(sphere.eval(pts), slab.eval(pts))
    assert np.array_equal(np.sign(v), np.sign(vmin))


# ---------------------------------------------------------------------------
# Lattice hash and wood
# ---------------------------------------------------------------------------

def test_lattice_hash_deterministic_and_bounded(rng):
    h1 = attributes.LatticeHash(seed=7)
    h2 = attributes.LatticeHash(seed=7)
    pts = rng.uniform(-100, 100, size=(5000, 3))
    a = h1.noise(pts)
    b = h2.noise(pts)
    assert np.array_equal(a, b)
    assert np.all((a >= 0) & (a < 1))
    h3 = attributes.LatticeHash(seed=8)
    assert not np.array_equal(a, h3.noise(pts))


def test_wood_fractional_part_semantics():
    stub = lambda p: np.full(np.shape(p)[:-1] or (1,), 0.5)
    v = attributes.wood(np.array([[0.3, 0.4]]), distance=1.0, c=3.0, hash_fn=stub)
    assert v[0] == pytest.approx(0.5)       # g = 1.5 -> frac 0.5
    stub_int = lambda p: np.full(np.shape(p)[:-1] or (1,), 2.0 / 3.0)
    v = attributes.wood(np.array([[0.3, 0.4]]), distance=1.0, c=3.0, hash_fn=stub_int)
    assert v[0] == pytest.approx(0.0, abs=1e-12)    # g integer -> 0
    with pytest.raises(ValueError):
        attributes.wood(np.zeros((1, 2)), 1.0, c=0.5)


def test_wood_distribution_roughly_uniform(rng):
    pts = rng.uniform(-3, 3, size=(10000, 2))
    d = rng.uniform(0.5, 2.0, size=10000)
    v = attributes.wood(pts, d, c=3.0, base_frequency=6.0, seed=0)
    assert np.all((v >= 0) & (v < 1))
    hist, _ = np.histogram(v, bins=10, range=(0, 1))
    # coarse chi-square sanity: no bin wildly off the uniform expectation
    expected = len(v) / 10
    chi2 = np.sum((hist - expected) ** 2 / expected)
    assert chi2 < 200


def test_wood_frequency_parameterised_by_distance(rng):
    pts = np.full((64, 2), 0.37)
    d1 = attributes.wood(pts, np.full(64, 1.0), seed=3)
    d2 = attributes.wood(pts, np.full(64, 2.0), seed=3)
    assert not np.allclose(d1, d2)


# ---------------------------------------------------------------------------
# Attribute functions, partitions, heterogeneous objects
# ---------------------------------------------------------------------------

def _disc_geometry():
    return pipeline.hfrep_build(models.build_model("disc"), "dt", square(1.0), res=129)


def test_constant_color_everywhere_inside(rng):
    geom = _disc_geometry()
    obj = attributes.HeterogeneousObject(
        geom, [attributes.AttributeFn("constant_color", color=(0.2, 0.6, 0.9))])
    pts = rng.uniform(-0.95, 0.95, size=(2000, 2))
    d, idx, rgb = obj.evaluate(pts)
    inside = d >= 0
    assert np.all(rgb[inside] == np.array([0.2, 0.6, 0.9]))
    assert np.all(idx[~inside] == -1)
    assert np.all(rgb[~inside] == np.array(obj.exterior_color))


def test_distance_bands_select_by_floor_lookup(rng):
    geom = _disc_geometry()
    edges = [0.0, 0.15, 0.35, 0.45, 10.0]
    bands = [(edges[i], edges[i + 1], i) for i in range(4)]
    attrs = [attributes.AttributeFn("constant_color", color=(i / 4, 0.2, 0.3))
             for i in range(4)]
    obj = attributes.HeterogeneousObject(geom, attrs, attributes.PartitionScheme(bands))
    obj.partitions.validate(4, 0.6)
    pts = rng.uniform(-0.95, 0.95, size=(5000, 2))
    d, idx, rgb = obj.evaluate(pts)
    inside = d >= 0
    expect = np.clip(np.searchsorted(np.array(edges), d[inside], side="right") - 1, 0, 3)
    assert np.array_equal(idx[inside], expect)
    # band boundaries land exactly on band edges
    for e in edges[1:4]:
        assert obj.partitions.select(np.array([e]))[0] == np.searchsorted(edges, e, "right") - 1


def test_partition_validation_errors():
    with pytest.raises(ValueError):
        attributes.PartitionScheme([(0.0, 0.2, 0), (0.3, 0.5, 0)]).validate(1, 0.5)
    with pytest.raises(ValueError):
        attributes.PartitionScheme([(0.1, 0.2, 0), (0.2, 0.6, 0)]).validate(1, 0.5)
    with pytest.raises(ValueError):
        attributes.PartitionScheme([(0.0, 0.2, 0), (0.1, 0.6, 0)]).validate(1, 0.5)
    with pytest.raises(ValueError):
        attributes.PartitionScheme([(0.0, 0.6, 3)]).validate(1, 0.5)


def test_distance_memoisation_invariance(rng):
    """Attributes depend on p only through (d, p): recomputing with a
    memoised distance field gives identical values."""
    geom = _disc_geometry()
    fn = attributes.AttributeFn("wood", c=3.0, base_frequency=8.0, seed=5)
    pts = rng.uniform(-0.9, 0.9, size=(500, 2))
    d = geom.eval(pts)
    a = fn.evaluate(d, pts)
    b = fn.evaluate(d.copy(), pts.copy())
    assert np.array_equal(a, b)


def test_wood_continuous_within_partition(rng):
    geom = _disc_geometry()
    fn = attributes.AttributeFn("wood", c=3.0, base_frequency=2.0, seed=1)
    p0 = np.array([0.2, 0.1])
    d0 = geom.eval(p0[None, :])
    deltas = np.logspace(-9, -6, 8)
    base = fn.evaluate(d0, p0[None, :])[0]
    for dx in deltas:
        p = p0 + np.array([dx, 0.0])
        v = fn.evaluate(geom.eval(p[None, :]), p[None, :])[0]
        if np.all(np.abs(v - base) < 0.5):     # away from the int() wrap set
            assert np.max(np.abs(v - base)) < 1e-3


def test_evaluate_attributes_function():
    geom = _disc_geometry()
    obj = attributes.HeterogeneousObject(
        geom, [attributes.AttributeFn("constant_color", color=(1.0, 0.0, 0.0))])
    d, idx, rgb = attributes.evaluate_attributes(obj, np.array([[0.0, 0.0]]))
    assert d[0] > 0 and idx[0] == 0
    assert np.array_equal(rgb[0], [1.0, 0.0, 0.0])


def test_slabs_attribute_kind(rng):
    geom = _disc_geometry()
    fn = attributes.AttributeFn("slabs", frequency=(12.0, 0.0), phase=(0.0, 0.0),
                                threshold=(0.3, 0.3), color=(0.9, 0.9, 0.9))
    obj = attributes.HeterogeneousObject(geom, [fn])
    pts = rng.uniform(-0.55, 0.55, size=(3000, 2))
    d, idx, rgb = obj.evaluate(pts)
    inside = d >= 0
    comp = np.sin(12.0 * pts[:, 0]) + 0.3
    kept = inside & (comp >= 0)
    cut = inside & (comp < 0)
    assert np.all(rgb[kept] == np.array([0.9, 0.9, 0.9]))
    assert np.all(rgb[cut] == np.array(obj.exterior_color))
    # raw component values are what the attribute evaluates to
    raw = fn.evaluate(d[inside], pts[inside])
    assert raw.shape[-1] == 2
    assert np.allclose(raw[:, 0], comp[inside])
