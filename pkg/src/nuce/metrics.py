"""Confusion-matrix classification metrics with macro and weighted
averaging.

Zero-division convention: a class with an empty denominator gets 0 for
that metric (not NaN), which keeps aggregation stable when a fold
contains no predicted positives.
"""

import numpy as np

from .exceptions import ConfigError, DataError

AVERAGING = ("macro", "weighted", "per_class")


def confusion(true_labels, pred_labels, n_classes: int) -> np.ndarray:
    """K x K count matrix; rows are true classes, columns predictions."""
    t = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(pred_labels, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1:
        raise DataError("true and predicted labels must be equal-length 1-D sequences")
    if t.size and (t.min() < 0 or t.max() >= n_classes or p.min() < 0 or p.max() >= n_classes):
        raise DataError(f"labels out of range [0, {n_classes})")
    cm = np.bincount(t * n_classes + p, minlength=n_classes * n_classes)
    return cm.reshape(n_classes, n_classes)


def _per_class_rates(cm: np.ndarray):
    tp = np.diag(cm).astype(np.float64)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    precision = np.divide(tp, tp + fp, out=np.zeros_like(tp), where=(tp + fp) > 0)
    recall = np.divide(tp, tp + fn, out=np.zeros_like(tp), where=(tp + fn) > 0)
    pr = precision + recall
    f1 = np.divide(2.0 * precision * recall, pr, out=np.zeros_like(tp), where=pr > 0)
    return precision, recall, f1


def prf1(cm: np.ndarray, averaging: str = "macro"):
    """(precision, recall, f1, accuracy) under the chosen averaging.

    macro: unweighted class mean. weighted: true-class-frequency
    weighted mean (weighted recall therefore equals accuracy).
    per_class: arrays of per-class values plus scalar accuracy.
    """
    if averaging not in AVERAGING:
        raise ConfigError(f"averaging must be one of {AVERAGING}")
    cm = np.asarray(cm)
    total = cm.sum()
    if total == 0:
        raise DataError("confusion matrix is empty")
    accuracy = float(np.trace(cm) / total)
    precision, recall, f1 = _per_class_rates(cm)
    if averaging == "per_class":
        return precision, recall, f1, accuracy
    if averaging == "macro":
        return (float(precision.mean()), float(recall.mean()),
                float(f1.mean()), accuracy)
    weights = cm.sum(axis=1) / total
    return (float(np.dot(weights, precision)), float(np.dot(weights, recall)),
            float(np.dot(weights, f1)), accuracy)


def metric_summary(cm: np.ndarray) -> dict:
    """Flat dict of the reported metrics, in a stable key order."""
    p_m, r_m, f_m, acc = prf1(cm, "macro")
    p_w, r_w, f_w, _ = prf1(cm, "weighted")
    return {
        "accuracy": acc,
        "precision_macro": p_m,
        "recall_macro": r_m,
        "f1_macro": f_m,
        "precision_weighted": p_w,
        "recall_weighted": r_w,
        "f1_weighted": f_w,
    }
