import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evmod.evaluate import (BoundingBox, GroundTruthFrame, f_measure, iou, load_truth,
                            match_and_score, match_partition, precision_recall_f, truth_to_json)


def test_iou_examples():
    a = BoundingBox(0, 0, 9, 9)
    assert iou(a, a) == 1.0
    assert iou(a, BoundingBox(20, 20, 29, 29)) == 0.0
    assert iou(BoundingBox(0, 0, 1, 0), BoundingBox(1, 0, 2, 0)) == pytest.approx(1 / 3)
    # touching edges share a pixel column under inclusive areas
    assert iou(BoundingBox(0, 0, 4, 4), BoundingBox(4, 0, 8, 4)) == pytest.approx(5 / 45)
    assert iou(BoundingBox(0, 0, 4, 4), BoundingBox(5, 0, 9, 4)) == 0.0


def test_inclusive_area():
    assert BoundingBox(3, 3, 3, 3).area == 1
    assert BoundingBox(0, 0, 9, 4).area == 50
    with pytest.raises(ValueError):
        BoundingBox(5, 0, 4, 0).validate()
    with pytest.raises(ValueError):
        BoundingBox(0, 0, 10, 0).validate(width=10)


def test_perfect_match():
    boxes = [BoundingBox(0, 0, 9, 9), BoundingBox(50, 50, 70, 60)]
    rep = match_and_score({1: boxes, 2: boxes[:1]}, {1: boxes, 2: boxes[:1]})
    assert (rep.tp, rep.fp, rep.fn) == (3, 0, 0)
    assert rep.summary_row() == "100.00 100.00 100.00"


def test_missed_object_is_fn():
    gt = [BoundingBox(0, 0, 9, 9), BoundingBox(50, 50, 70, 60)]
    rep = match_and_score({1: gt[:1]}, {1: gt})
    assert (rep.tp, rep.fp, rep.fn) == (1, 0, 1)
    assert rep.precision == 1.0 and rep.recall == 0.5


def test_low_iou_pair_is_fp_and_fn():
    gt = [BoundingBox(0, 0, 9, 9)]
    det = [BoundingBox(0, 0, 9, 19)]  # IoU 0.5
    tp, fp, fn, matches = match_partition(det, gt)
    assert (tp, fp, fn) == (0, 1, 1)
    assert matches == [(0, 0, 0.5)]


def test_greedy_one_to_one():
    gt = [BoundingBox(0, 0, 9, 9)]
    dets = [BoundingBox(0, 0, 9, 9), BoundingBox(0, 0, 9, 10)]
    tp, fp, fn, matches = match_partition(dets, gt)
    assert (tp, fp, fn) == (1, 1, 0)
    assert matches[0][:2] == (0, 0)


def test_hands_f_measure():
    assert round(100 * f_measure(0.9156, 0.9068), 2) == 91.12
    p, r, f = precision_recall_f(0, 0, 0)
    assert (p, r, f) == (0.0, 0.0, 0.0)


def test_partition_mismatch_raises():
    with pytest.raises(ValueError, match="partition indices"):
        match_and_score({1: []}, {2: []})


boxes = st.tuples(st.integers(0, 50), st.integers(0, 50), st.integers(0, 30),
                  st.integers(0, 30)).map(lambda b: BoundingBox(b[0], b[1], b[0] + b[2], b[1] + b[3]))


@given(st.lists(boxes, max_size=6), st.lists(boxes, max_size=6))
@settings(max_examples=200, deadline=None)
def test_counting_identities_and_monotone_threshold(dets, gts):
    prev = None
    for thr in (0.1, 0.3, 0.5, 0.75, 0.9, 1.0):
        tp, fp, fn, _ = match_partition(dets, gts, thr)
        assert tp + fp == len(dets) and tp + fn == len(gts)
        if prev is not None:
            assert tp <= prev
        prev = tp


@given(boxes, boxes)
def test_iou_symmetric_and_bounded(a, b):
    v = iou(a, b)
    assert v == iou(b, a) and 0.0 <= v <= 1.0


def test_truth_round_trip(tmp_path):
    frames = [GroundTruthFrame(1, [BoundingBox(1, 2, 3, 4)]), GroundTruthFrame(2, [])]
    path = tmp_path / "truth.json"
    path.write_text(truth_to_json(frames))
    back = load_truth(path)
    assert back[1].boxes == [BoundingBox(1, 2, 3, 4)] and back[2].boxes == []
    path.write_text(json.dumps({"frames": []}))
    with pytest.raises(ValueError):
        load_truth(path)


def test_report_dict():
    gt = {1: [BoundingBox(0, 0, 9, 9)]}
    d = match_and_score(gt, gt).to_dict()
    assert d["tp"] == 1 and d["per_partition"][0]["matches"] == [[0, 0, 1.0]]
    json.dumps(d)
