"""Single-class bounding-box evaluation: IoU, greedy matching, average
precision with all-points interpolation, and the mAP suite at IoU
thresholds 0.25 / 0.5 / 0.75 plus the 0.50:0.05:0.95 mean.

Detections are exchanged as JSON lines, one object per image:
    {"image": str, "gt": [[x0,y0,x1,y1], ...],
     "pred": [[x0,y0,x1,y1,conf], ...]}
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DataError

COCO_THRESHOLDS = tuple(t / 100.0 for t in range(50, 100, 5))


@dataclass(frozen=True)
class Box:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("box coordinates must be finite")
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError(f"degenerate box {vals}: area must be strictly positive")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


@dataclass
class DetectionSet:
    """Ground truth and scored predictions for a single image."""

    image: str
    ground_truth: list
    predictions: list  # (Box, confidence) pairs

    def __post_init__(self):
        for _, conf in self.predictions:
            if not 0.0 <= conf <= 1.0:
                raise ValueError(f"confidence {conf} outside [0, 1]")


def iou(a: Box, b: Box) -> float:
    """Intersection over union; 0 for disjoint boxes."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def greedy_match(sets, iou_thresh: float) -> list:
    """Pool predictions across images, sort by confidence, match greedily.

    Returns one (set_index, pred_index, confidence, gt_index) tuple per
    prediction in descending-confidence order (ties keep insertion
    order); gt_index is None for false positives. A prediction matches
    the unmatched ground-truth box of its own image with the highest
    IoU >= iou_thresh, ties to the lowest gt index.
    """
    pooled = []
    for si, ds in enumerate(sets):
        for pi, (box, conf) in enumerate(ds.predictions):
            pooled.append((si, pi, box, conf))
    pooled.sort(key=lambda rec: -rec[3])  # stable: equal confidences keep pool order

    taken = [set() for _ in sets]
    records = []
    for si, pi, box, conf in pooled:
        best_iou = 0.0
        best_gt = None
        for gi, gt in enumerate(sets[si].ground_truth):
            if gi in taken[si]:
                continue
            v = iou(box, gt)
            if v > best_iou:  # strict: first maximum wins, so ties go low
                best_iou = v
                best_gt = gi
        if best_gt is not None and best_iou >= iou_thresh:
            taken[si].add(best_gt)
            records.append((si, pi, conf, best_gt))
        else:
            records.append((si, pi, conf, None))
    return records


def precision_recall_points(sets, iou_thresh: float):
    """Cumulative (recall, precision) arrays over the ranked predictions."""
    n_gt = sum(len(ds.ground_truth) for ds in sets)
    if n_gt == 0:
        raise DataError("no ground-truth boxes to evaluate against")
    records = greedy_match(sets, iou_thresh)
    tp = np.array([rec[3] is not None for rec in records], dtype=np.float64)
    ctp = np.cumsum(tp)
    cfp = np.cumsum(1.0 - tp)
    recall = ctp / n_gt
    precision = np.divide(ctp, ctp + cfp, out=np.zeros_like(ctp), where=(ctp + cfp) > 0)
    return recall, precision


def average_precision(sets, iou_thresh: float) -> float:
    """Area under the PR curve with the precision envelope made
    monotone non-increasing (all-points interpolation)."""
    recall, precision = precision_recall_points(sets, iou_thresh)
    if recall.shape[0] == 0:
        return 0.0
    mrec = np.concatenate([[0.0], recall, [1.0]])
    mpre = np.concatenate([[0.0], precision, [0.0]])
    for i in range(mpre.shape[0] - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    steps = np.nonzero(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))


def map_suite(sets) -> dict:
    """AP at the fixed thresholds plus the COCO-style 0.50:0.05:0.95 mean.

    Single class, so the per-class mean is the AP itself.
    """
    return {
        "mAP": float(np.mean([average_precision(sets, t) for t in COCO_THRESHOLDS])),
        "mAP@25": average_precision(sets, 0.25),
        "mAP@50": average_precision(sets, 0.50),
        "mAP@75": average_precision(sets, 0.75),
    }


def cascade_gate(probs, tau: float) -> np.ndarray:
    """Stage-1 gate: 1 where prob >= tau (boundary inclusive), else 0."""
    if not 0.0 <= tau <= 1.0:
        raise ConfigError(f"tau {tau} outside [0, 1]")
    p = np.asarray(probs, dtype=np.float64)
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise DataError("probabilities must lie in [0, 1]")
    return (p >= tau).astype(np.int64)


def load_detections_jsonl(path) -> list:
    """Parse detection sets from JSON lines; malformed input raises ConfigError."""
    sets = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                gt = [Box(*vals) for vals in obj["gt"]]
                preds = [(Box(*vals[:4]), float(vals[4])) for vals in obj["pred"]]
                sets.append(DetectionSet(str(obj["image"]), gt, preds))
            except (ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"{path} line {line_no}: {exc}") from exc
    return sets
