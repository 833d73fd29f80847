import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import flood_fill_labels, same_partition
from physinfo.descent import (
    DimensionError, LevelRefinement, border_mask, expand_maps, find_deviating_pixels,
    refine_level, region_stats, run_descent,
)
from physinfo.metrics import adjusted_rand_index
from physinfo.pyramid import build_pyramid
from physinfo.segment import LabelMap, SegConfig, segment_top
from physinfo.synth import PRESETS, synthesize


def test_expand_maps_replicates_and_crops():
    coarse = LabelMap(np.array([[1, 2], [3, 3]]), level=1)
    stats = region_stats(coarse.labels, np.array([[10.0, 20.0], [30.0, 50.0]]))
    lab, pred = expand_maps(coarse, stats, 3, 4)
    assert lab.level == 0
    assert lab.labels.tolist() == [[1, 1, 2], [1, 1, 2], [3, 3, 3], [3, 3, 3]]
    assert pred.tolist() == [[10, 10, 20], [10, 10, 20], [40, 40, 40], [40, 40, 40]]


def test_expand_maps_dimension_check():
    coarse = LabelMap(np.ones((2, 2), dtype=int), level=1)
    with pytest.raises(DimensionError):
        expand_maps(coarse, region_stats(coarse.labels, np.zeros((2, 2))), 5, 4)


def test_region_stats():
    st_ = region_stats(np.array([[1, 1, 4]]), np.array([[2.0, 4.0, 9.0]]))
    assert sorted(st_) == [1, 4]
    assert st_[1].pixel_count == 2 and st_[1].mean == 3.0
    assert st_[4].intensity_sum == 9.0


def test_deviating_pixels():
    lab = np.array([[1, 1, 1, 2]])
    pred = np.array([[0.0, 0.0, 0.0, 50.0]])
    ref = np.array([[0.0, 30.0, 0.0, 50.0]])
    dev = find_deviating_pixels(lab, pred, ref, 10.0)
    # pixel 1 deviates by intensity, pixels 2 and 3 sit on the border
    assert dev.tolist() == [[False, True, True, True]]
    assert border_mask(lab).tolist() == [[False, False, True, True]]
    with pytest.raises(DimensionError):
        find_deviating_pixels(lab, pred[:, :2], ref, 10.0)


def test_refine_moves_boundary():
    ref = np.zeros((6, 8))
    ref[:, 3:] = 200
    lab = np.ones((6, 8), dtype=int)
    lab[:, 4:] = 2
    res = refine_level(LabelMap(lab), ref)
    assert isinstance(res, LevelRefinement) and res.converged
    assert same_partition(res.labels.labels, (ref > 0).astype(int))
    assert res.stats[1].mean == 0.0 and res.stats[2].mean == 200.0


def test_refine_seeds_hidden_block():
    ref = np.full((24, 24), 40.0)
    ref[5:9, 3:7] = 180.0
    res = refine_level(LabelMap(np.ones((24, 24), dtype=int)), ref, next_id=7)
    assert same_partition(res.labels.labels, (ref > 100).astype(int))
    assert int(res.labels.labels[6, 4]) == 7 and res.next_id == 8
    assert int(res.labels.labels[0, 0]) == 1
    assert res.parents == {7: 1}


def test_refine_seeds_both_sides_of_a_skewed_mean():
    # the block pulls the region mean more than tau away from the background,
    # so both clusters deviate and both are seeded from region 1
    ref = np.full((12, 12), 40.0)
    ref[5:9, 3:7] = 180.0
    res = refine_level(LabelMap(np.ones((12, 12), dtype=int)), ref, next_id=7)
    assert same_partition(res.labels.labels, (ref > 100).astype(int))
    assert res.parents == {7: 1, 8: 1}
    assert 1 not in res.stats


def test_refine_ignores_small_clusters():
    ref = np.full((8, 8), 40.0)
    ref[2:4, 2:3] = 200.0  # 2 px, below seed_min_px
    res = refine_level(LabelMap(np.ones((8, 8), dtype=int)), ref)
    assert np.all(res.labels.labels == 1)


def test_refine_merges_equal_regions():
    ref = np.full((4, 8), 100.0)
    lab = np.ones((4, 8), dtype=int)
    lab[:, 4:] = 2
    res = refine_level(LabelMap(lab), ref)
    assert np.all(res.labels.labels == 1)


def test_refine_shape_check():
    with pytest.raises(DimensionError):
        refine_level(LabelMap(np.ones((2, 2), dtype=int)), np.zeros((3, 3)))


def test_run_descent_shape_check():
    pyr = build_pyramid(np.zeros((32, 32)))
    with pytest.raises(DimensionError):
        run_descent(pyr, LabelMap(np.ones((3, 3), dtype=int), pyr.top_level))


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_recovered(name):
    img, truth = synthesize(PRESETS[name])
    pyr = build_pyramid(img)
    res = run_descent(pyr, segment_top(pyr.top, SegConfig(), pyr.top_level))
    assert len(res.labels) == len(pyr)
    assert adjusted_rand_index(res.final.labels, truth) == 1.0
    for level, lm in enumerate(res.labels):
        assert lm.level == level and lm.shape == pyr[level].shape


def test_parents_point_one_level_up():
    img, _ = synthesize(PRESETS["rects5"])
    pyr = build_pyramid(img)
    res = run_descent(pyr, segment_top(pyr.top, SegConfig(), pyr.top_level))
    for level in range(res.top_level):
        above = set(np.unique(res.labels[level + 1].labels).tolist())
        for rid, parent in res.parents[level].items():
            assert rid not in above
            assert parent in above


# property suites

@st.composite
def refinement_cases(draw):
    ch, cw = draw(st.integers(1, 6)), draw(st.integers(1, 6))
    coarse = np.array(draw(st.lists(st.integers(1, 4), min_size=ch * cw, max_size=ch * cw))).reshape(ch, cw)
    h = 2 * ch - draw(st.integers(0, 1) if ch > 1 else st.just(0))
    w = 2 * cw - draw(st.integers(0, 1) if cw > 1 else st.just(0))
    expanded = np.repeat(np.repeat(coarse, 2, 0), 2, 1)[:h, :w]
    if draw(st.booleans()):
        # arbitrary intensities
        vals = draw(st.lists(st.floats(0, 255), min_size=h * w, max_size=h * w))
        ref = np.array(vals).reshape(h, w)
    else:
        # piecewise levels with mild jitter and a few outliers
        levels = np.array(draw(st.lists(st.sampled_from([0.0, 30.0, 90.0, 200.0]), min_size=h * w, max_size=h * w)))
        block = levels.reshape(h, w)
        block = np.repeat(np.repeat(block[::2, ::2], 2, 0), 2, 1)[:h, :w] if draw(st.booleans()) else block
        jitter = np.array(draw(st.lists(st.floats(-4, 4), min_size=h * w, max_size=h * w))).reshape(h, w)
        ref = np.clip(block + jitter, 0, 255)
    cfg = SegConfig(seed_min_px=draw(st.integers(1, 5)), deviation_tau=draw(st.sampled_from([5.0, 10.0, 25.0])),
                    max_refine_iters=draw(st.integers(1, 5)))
    return LabelMap(expanded, 0), ref, cfg


def _assert_valid_partition(lab: np.ndarray, shape):
    assert lab.shape == shape
    assert lab.min() >= 1
    comps = flood_fill_labels(lab)
    # every region is exactly one 4-connected component
    assert len(np.unique(comps)) == len(np.unique(lab))


@settings(max_examples=1000)
@given(refinement_cases())
def test_refine_partition_valid(case):
    expanded, ref, cfg = case
    res = refine_level(expanded, ref, cfg)
    assert res.converged
    _assert_valid_partition(res.labels.labels, ref.shape)
    start = int(expanded.labels.max()) + 1
    for rid, parent in res.parents.items():
        assert rid >= start and parent < start


@settings(max_examples=1000)
@given(refinement_cases())
def test_refine_idempotent(case):
    expanded, ref, cfg = case
    first = refine_level(expanded, ref, cfg)
    again = refine_level(first.labels, ref, cfg, first.next_id)
    assert np.array_equal(again.labels.labels, first.labels.labels)
    assert again.next_id == first.next_id and again.parents == {}


@settings(max_examples=1000)
@given(refinement_cases())
def test_refine_stats_consistent(case):
    expanded, ref, cfg = case
    res = refine_level(expanded, ref, cfg)
    lab = res.labels.labels
    assert sorted(res.stats) == np.unique(lab).tolist()
    for rid, s in res.stats.items():
        mask = lab == rid
        assert s.pixel_count == mask.sum()
        assert abs(s.intensity_sum - ref[mask].sum()) <= 1e-6
        assert abs(s.mean - ref[mask].mean()) <= 1e-6
