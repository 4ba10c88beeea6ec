import numpy as np
import pytest

from hfrep import frep, models


def test_declared_op_counts():
    for name in models.model_names():
        tree = models.build_model(name)
        assert frep.count_ops(tree) == models.declared_op_count(name), name


def test_named_counts_match_reference_values():
    assert models.declared_op_count("star") == 7
    assert models.declared_op_count("bat") == 14
    assert models.declared_op_count("robot") == 39
    assert models.declared_op_count("heart") == 0


def test_unknown_model():
    with pytest.raises(KeyError):
        models.build_model("nonesuch")
    with pytest.raises(KeyError):
        models.model_bbox("nonesuch")


def test_models_have_interior_and_exterior(rng):
    for name in models.model_names():
        tree = models.build_model(name)
        bbox = models.model_bbox(name)
        pts = rng.uniform(bbox.lo, bbox.hi, size=(4000, bbox.dim))
        vals = tree.eval(pts)
        assert np.any(vals > 0), name
        assert np.any(vals < 0), name


def test_star_contains_origin_heart_contains_centre():
    assert models.build_model("star").eval(np.zeros(2)) > 0
    assert models.build_model("heart").eval(np.array([0.0, 0.2])) > 0
    assert models.build_model("disc").eval(np.zeros(2)) > 0
    assert models.build_model("sphere3d").eval(np.zeros(3)) > 0


def test_bat_sign_symmetry(rng):
    # r_union is not associative, so the field values depend on fold order;
    # the geometry (the sign) is mirror symmetric
    bat = models.build_model("bat")
    pts = rng.uniform(-1, 1, size=(2000, 2))
    mirrored = pts * np.array([-1.0, 1.0])
    assert np.array_equal(np.sign(bat.eval(pts)), np.sign(bat.eval(mirrored)))
