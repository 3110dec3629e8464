import numpy as np
import pytest

from conftest import circle, circle_descriptor, random_descriptor
from fourier_contours.anchors import (IGNORE, NEGATIVE, AnchorSet, AssignConfig, TargetDelta,
                                      assign, decode_targets, encode_targets, fit_anchors,
                                      kmeans, tile_anchors)
from fourier_contours.efd import FourierDescriptor, efd_decode
from fourier_contours.errors import DegenerateClustering, EmptyGroundTruth, ShapeMismatch
from fourier_contours.metrics import combined_iou


def test_kmeans_identical_vectors_degenerate():
    ds = [circle_descriptor(5.0) for _ in range(100)]
    with pytest.raises(DegenerateClustering):
        fit_anchors(ds, k=9)


def test_fit_two_groups_matches_group_means(rng):
    small = [circle_descriptor(10.0) for _ in range(30)]
    big = [circle_descriptor(50.0) for _ in range(20)]
    for d in small + big:
        d.coeffs = d.coeffs + rng.normal(0, 0.1, d.coeffs.shape)
    a = fit_anchors(small + big, k=2, seed=0)
    # ordered by population: the 30-member group first
    np.testing.assert_allclose(a.base_anchors[0].coeffs,
                               np.mean([d.coeffs for d in small], axis=0), atol=1e-3)
    np.testing.assert_allclose(a.base_anchors[1].coeffs,
                               np.mean([d.coeffs for d in big], axis=0), atol=1e-3)
    for b in a.base_anchors:
        np.testing.assert_allclose(b.center, 0.0)


def test_fit_deterministic(rng):
    ds = [random_descriptor(rng) for _ in range(60)]
    a1 = fit_anchors(ds, k=9, seed=4)
    a2 = fit_anchors(ds, k=9, seed=4)
    for x, y in zip(a1.base_anchors, a2.base_anchors):
        assert np.array_equal(x.coeffs, y.coeffs)


def test_kmeans_inertia_non_increasing(rng):
    x = rng.normal(size=(300, 28))
    res = kmeans(x, 9, seed=1)
    h = res.inertia_history
    assert all(b <= a + 1e-9 for a, b in zip(h, h[1:]))
    assert res.iterations <= 100


def test_fit_ordering_ties_by_first_coefficient():
    ds = [circle_descriptor(r) for r in (30.0, 10.0, 20.0)]
    a = fit_anchors(ds, k=3)
    assert [b.coeffs[0, 0] for b in a.base_anchors] == [0.0, 0.0, 0.0]
    # equal populations and first coefficients: later coefficients decide
    b = fit_anchors(ds, k=3, seed=9)
    assert [x.coeffs[0, 1] for x in a.base_anchors] == [10.0, 20.0, 30.0]
    assert [x.coeffs[0, 1] for x in b.base_anchors] == [10.0, 20.0, 30.0]


def test_tile_count_default():
    a = AnchorSet([circle_descriptor(r) for r in range(1, 10)])
    assert len(tile_anchors(a)) == 52 * 52 * 9 == 24336


def test_tile_single_cell():
    a = AnchorSet([circle_descriptor(3.0)], stride=8, image_size=(8, 8))
    (p,) = tile_anchors(a)
    np.testing.assert_allclose(p.center, [4, 4])


def test_tile_ordering():
    a = AnchorSet([circle_descriptor(1.0), circle_descriptor(2.0)], stride=8, image_size=(24, 16))
    placed = tile_anchors(a)
    assert len(placed) == 3 * 2 * 2
    centers = [tuple(p.center) for p in placed[::2]]
    assert centers == [(4, 4), (12, 4), (20, 4), (4, 12), (12, 12), (20, 12)]
    assert [p.coeffs[0, 1] for p in placed[:4]] == [1.0, 2.0, 1.0, 2.0]


def test_encode_translated_circle():
    a = circle_descriptor(10.0)
    g = circle_descriptor(10.0, center=(10.0, 0.0))
    t = encode_targets(g, a)
    # level-1 extent is 2r = 20
    np.testing.assert_allclose(t.loc, [0.5, 0.0])
    np.testing.assert_allclose(t.fourier, 0.0)


def test_encode_scale_invariance(rng):
    g, a = random_descriptor(rng), random_descriptor(rng)
    s = 3.5
    gs = FourierDescriptor(g.center * s, g.coeffs * s)
    as_ = FourierDescriptor(a.center * s, a.coeffs * s)
    t1, t2 = encode_targets(g, a), encode_targets(gs, as_)
    np.testing.assert_allclose(t2.vector(), t1.vector(), atol=1e-9)


def test_encode_decode_roundtrip(rng):
    for _ in range(10):
        g, a = random_descriptor(rng), random_descriptor(rng)
        back = decode_targets(encode_targets(g, a), a)
        np.testing.assert_allclose(back.coeffs, g.coeffs, atol=1e-9)
        np.testing.assert_allclose(back.center, g.center, atol=1e-9)


def test_zero_delta_decodes_to_anchor(rng):
    a = random_descriptor(rng)
    back = decode_targets(TargetDelta.zeros(7), a)
    assert np.array_equal(back.coeffs, a.coeffs)


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        encode_targets(circle_descriptor(1.0, n_harmonics=5), circle_descriptor(1.0))
    with pytest.raises(ShapeMismatch):
        decode_targets(TargetDelta.zeros(5), circle_descriptor(1.0))


def test_assign_identical_positive_and_disjoint_negative():
    placed = [circle_descriptor(10.0, (50, 50)), circle_descriptor(10.0, (300, 300))]
    gt = efd_decode(circle_descriptor(10.0, (50, 50)), 360)
    res = assign(placed, [gt])
    assert res.labels[0] == 0 and res.labels[1] == NEGATIVE
    assert res.max_iou[0] == pytest.approx(1.0, abs=1e-2)
    np.testing.assert_allclose(res.targets[0].vector(), 0.0, atol=1e-6)


def test_assign_between_thresholds_is_ignored():
    # concentric circles: box IoU (r/R)^2, polar IoU r/R, combined (r/R)^3
    ratio = 0.15 ** (1 / 3)
    placed = [circle_descriptor(10.0 * ratio, (100, 100)), circle_descriptor(10.0, (100, 100))]
    gt = efd_decode(circle_descriptor(10.0, (100, 100)), 360)
    res = assign(placed, [gt])
    assert res.max_iou[0] == pytest.approx(0.15, abs=5e-3)
    assert res.labels[0] == IGNORE
    assert res.labels[1] == 0


def test_force_match():
    placed = [circle_descriptor(3.0, (100, 100)), circle_descriptor(10.0, (300, 300))]
    gt = efd_decode(circle_descriptor(10.0, (100, 100)), 360)
    res = assign(placed, [gt])
    assert res.labels[0] == 0
    assert res.matched_iou[0] < 0.25
    off = assign(placed, [gt], AssignConfig(force_match=False))
    assert not np.any(off.labels >= 0)


def test_assign_partition(rng):
    a = AnchorSet([circle_descriptor(r) for r in (6.0, 12.0, 20.0)], image_size=(64, 64))
    placed = tile_anchors(a)
    gts = [efd_decode(circle_descriptor(12.0, (30, 30)), 360),
           efd_decode(circle_descriptor(6.0, (10, 50)), 360)]
    res = assign(placed, gts)
    parts = [set(res.positives), set(res.negatives), set(res.ignored)]
    assert sum(map(len, parts)) == len(placed)
    assert not (parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2])
    for g in range(len(gts)):
        assert np.any(res.labels == g)
    assert set(res.targets) == parts[0]


def test_assign_decode_resolution_stable(rng):
    g = random_descriptor(rng, radius=20, decay=2.5, center_scale=0)
    g.center = np.array([60.0, 60.0])
    gt = efd_decode(g, 360)
    for _ in range(5):
        a = random_descriptor(rng, radius=20, decay=2.5, center_scale=0)
        a.center = np.array([60.0, 60.0]) + rng.normal(0, 4, 2)
        lo = combined_iou(efd_decode(a, 64), gt)
        hi = combined_iou(efd_decode(a, 256), gt)
        assert abs(lo - hi) <= 1e-2


def test_assign_empty_gt():
    with pytest.raises(EmptyGroundTruth):
        assign([circle_descriptor(1.0)], [])


def test_assign_accepts_contour_gt_with_descriptor():
    gt = circle(10.0, (40, 40))
    res = assign([circle_descriptor(10.0, (40, 40))], [gt])
    assert res.targets[0].loc == pytest.approx([0.0, 0.0], abs=1e-6)
