"""IoU coverage test between detections and ground-truth boxes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

DEFAULT_IOU_THRESHOLD = 0.75


class BoundingBox(NamedTuple):
    """Inclusive pixel box."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def validate(self, width=None, height=None):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"inverted box {tuple(self)}")
        if width is not None and not (0 <= self.x_min and self.x_max < width):
            raise ValueError(f"box {tuple(self)} outside width {width}")
        if height is not None and not (0 <= self.y_min and self.y_max < height):
            raise ValueError(f"box {tuple(self)} outside height {height}")
        return self

    @property
    def area(self) -> int:
        return (self.x_max - self.x_min + 1) * (self.y_max - self.y_min + 1)

    def contains(self, x, y) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class GroundTruthFrame:
    partition_index: int
    boxes: list


@dataclass
class PartitionScore:
    partition_index: int
    tp: int
    fp: int
    fn: int
    matches: list = field(default_factory=list)  # (detection idx, gt idx, iou)


@dataclass
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_measure: float
    iou_threshold: float
    per_partition: list

    def to_dict(self):
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn,
            "precision": self.precision, "recall": self.recall, "f_measure": self.f_measure,
            "iou_threshold": self.iou_threshold,
            "per_partition": [
                {"partition": s.partition_index, "tp": s.tp, "fp": s.fp, "fn": s.fn,
                 "matches": [[d, g, v] for d, g, v in s.matches]}
                for s in self.per_partition
            ],
        }

    def summary_row(self) -> str:
        """``recall precision f_measure`` in percent."""
        return f"{100 * self.recall:.2f} {100 * self.precision:.2f} {100 * self.f_measure:.2f}"


def iou(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min) + 1
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min) + 1
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def precision_recall_f(tp, fp, fn):
    p = tp / (tp + fp) if tp + fp > 0 else 0.0
    r = tp / (tp + fn) if tp + fn > 0 else 0.0
    return p, r, f_measure(p, r)


def f_measure(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def match_partition(detections, truth, threshold=DEFAULT_IOU_THRESHOLD):
    """Greedy one-to-one pairing by descending IoU (ties: lower detection, then GT index).

    Returns ``(tp, fp, fn, matches)``. Pairs need IoU > 0 to pair at all.
    """
    pairs = []
    for d, db in enumerate(detections):
        for g, gb in enumerate(truth):
            v = iou(db, gb)
            if v > 0:
                pairs.append((-v, d, g))
    pairs.sort()
    used_d, used_g, matches = set(), set(), []
    tp = 0
    for negv, d, g in pairs:
        if d in used_d or g in used_g:
            continue
        used_d.add(d)
        used_g.add(g)
        matches.append((d, g, -negv))
        if -negv >= threshold:
            tp += 1
    fp = len(detections) - tp
    fn = len(truth) - tp
    return tp, fp, fn, matches


def match_and_score(detections: dict, truth: dict, threshold=DEFAULT_IOU_THRESHOLD) -> EvalReport:
    """Score per-partition detection boxes against ground truth.

    ``detections`` and ``truth`` map partition index to a list of boxes
    (``GroundTruthFrame`` values are accepted for truth). A detection paired
    below threshold counts as FP and leaves its GT box as FN.
    """
    truth = {k: (v.boxes if isinstance(v, GroundTruthFrame) else v) for k, v in truth.items()}
    if set(detections) != set(truth):
        missing = sorted(set(truth) ^ set(detections))
        raise ValueError(f"partition indices differ between detections and truth: {missing}")
    per, tp, fp, fn = [], 0, 0, 0
    for idx in sorted(truth):
        dets = [BoundingBox(*b) for b in detections[idx]]
        gts = [BoundingBox(*b) for b in truth[idx]]
        t, f, n, matches = match_partition(dets, gts, threshold)
        per.append(PartitionScore(idx, t, f, n, matches))
        tp, fp, fn = tp + t, fp + f, fn + n
    p, r, f = precision_recall_f(tp, fp, fn)
    return EvalReport(tp=tp, fp=fp, fn=fn, precision=p, recall=r, f_measure=f,
                      iou_threshold=threshold, per_partition=per)


# --------------------------------------------------------------------------
# ground-truth file


def truth_to_json(frames) -> str:
    return json.dumps({"partitions": [
        {"index": fr.partition_index, "boxes": [list(map(int, b)) for b in fr.boxes]}
        for fr in frames
    ]}, indent=2)


def load_truth(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    try:
        return {int(p["index"]): GroundTruthFrame(int(p["index"]),
                                                  [BoundingBox(*map(int, b)).validate()
                                                   for b in p["boxes"]])
                for p in doc["partitions"]}
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed ground-truth file ({exc})") from None
