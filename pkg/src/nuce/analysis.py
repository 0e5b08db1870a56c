"""Embedding-space diagnostics: 2-D PCA projection and cluster
compactness statistics relative to the class anchors.

The separation score ("fisher ratio") is the minimum inter-anchor
distance divided by the largest per-class mean feature-to-anchor
distance; larger means tighter, better separated clusters.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DataError, ShapeError
from .linalg import as_matrix
from .losses import AnchorSet

POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000


@dataclass
class ProjectionResult:
    components: np.ndarray  # (2, d), orthonormal rows
    projected: np.ndarray  # (N, 2)
    explained_variance: np.ndarray  # (2,)


def _power_iteration(cov: np.ndarray, start: np.ndarray):
    """Dominant eigenpair of a PSD matrix; returns (eigenvalue, vector)."""
    v = start / np.linalg.norm(start)
    for _ in range(POWER_MAX_ITER):
        av = cov @ v
        norm = np.linalg.norm(av)
        if norm < 1e-300:  # matrix is (numerically) zero on this subspace
            return 0.0, None
        v_new = av / norm
        if np.linalg.norm(v_new - v) < POWER_TOL:
            v = v_new
            break
        v = v_new
    return float(v @ cov @ v), v


def _orthogonal_complement(v: np.ndarray) -> np.ndarray:
    """Deterministic unit vector orthogonal to v (for zero-variance axes)."""
    basis = np.zeros_like(v)
    basis[int(np.argmin(np.abs(v)))] = 1.0
    u = basis - (basis @ v) * v
    return u / np.linalg.norm(u)


def _fix_sign(v: np.ndarray) -> np.ndarray:
    return -v if v[int(np.argmax(np.abs(v)))] < 0 else v


def pca_2d(h: np.ndarray) -> ProjectionResult:
    """Top-2 principal components via power iteration with deflation.

    Rows are mean-centered first; the sample covariance uses 1/(N-1).
    Sign convention: each component's largest-magnitude entry is
    positive. The start vector comes from a fixed-seed generator, so
    repeated calls are deterministic.
    """
    h = as_matrix(h)
    n, d = h.shape
    if n < 3:
        raise ShapeError("need at least 3 rows for a 2-D projection")
    if d < 2:
        raise ShapeError("need at least 2 feature dimensions")
    centered = h - h.mean(axis=0)
    if np.abs(centered).max() == 0.0:
        raise DataError("all rows identical: covariance has rank 0")
    cov = (centered.T @ centered) / (n - 1)

    rng = np.random.default_rng(0)
    ev1, v1 = _power_iteration(cov, rng.normal(size=d))
    if v1 is None:
        raise DataError("covariance has rank 0")
    deflated = cov - ev1 * np.outer(v1, v1)
    v2 = None
    if np.abs(deflated).max() > 1e-12 * np.abs(cov).max():
        _, v2 = _power_iteration(deflated, rng.normal(size=d))
    if v2 is not None:
        # re-orthogonalize; on rank-1 data the deflated matrix is pure
        # rounding noise and the residual collapses, so fall back below
        resid = v2 - (v2 @ v1) * v1
        norm = np.linalg.norm(resid)
        v2 = resid / norm if norm > 1e-6 else None
    if v2 is None:
        v2 = _orthogonal_complement(v1)
    ev2 = max(float(v2 @ cov @ v2), 0.0)
    if ev2 > ev1:  # only possible within fp noise of a tied spectrum
        v1, v2, ev1, ev2 = v2, v1, ev2, ev1
    components = np.vstack([_fix_sign(v1), _fix_sign(v2)])
    return ProjectionResult(
        components=components,
        projected=centered @ components.T,
        explained_variance=np.array([ev1, ev2]),
    )


@dataclass
class ClusterStats:
    """Per-class compactness and anchor separation summary.

    fisher_ratio is math.inf when every present class sits exactly on
    its anchor, and None (with single_class set) when fewer than two
    anchors exist.
    """

    mean_intra_dist: dict
    omitted_classes: list
    min_inter_anchor_dist: float | None
    fisher_ratio: float | None
    single_class: bool = False

    def to_json_dict(self) -> dict:
        ratio = self.fisher_ratio
        return {
            "mean_intra_dist": {str(k): v for k, v in self.mean_intra_dist.items()},
            "omitted_classes": list(self.omitted_classes),
            "min_inter_anchor_dist": self.min_inter_anchor_dist,
            "fisher_ratio": None if ratio is None or math.isinf(ratio) else ratio,
            "fisher_ratio_infinite": ratio is not None and math.isinf(ratio),
            "single_class": self.single_class,
        }


def cluster_stats(h: np.ndarray, labels, anchors: AnchorSet) -> ClusterStats:
    """Mean ||h_i - a_{y_i}|| per class, minimum anchor separation, and
    their ratio. Classes without samples are omitted and flagged."""
    h = as_matrix(h)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (h.shape[0],):
        raise ShapeError("labels must have one entry per feature row")
    k = anchors.n_classes
    if anchors.dim != h.shape[1]:
        raise ShapeError(f"anchors have dim {anchors.dim}, features {h.shape[1]}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise DataError(f"labels out of range [0, {k})")

    intra = {}
    omitted = []
    for c in range(k):
        rows = h[labels == c]
        if rows.shape[0] == 0:
            omitted.append(c)
            continue
        diff = rows - anchors.anchors[c]
        intra[c] = float(np.mean(np.sqrt(np.sum(diff * diff, axis=1))))

    if k < 2:
        return ClusterStats(intra, omitted, None, None, single_class=True)
    a = anchors.anchors
    min_inter = min(
        float(np.linalg.norm(a[i] - a[j]))
        for i in range(k) for j in range(i + 1, k)
    )
    if not intra:
        raise DataError("no class has any samples")
    max_intra = max(intra.values())
    ratio = math.inf if max_intra == 0.0 else min_inter / max_intra
    return ClusterStats(intra, omitted, min_inter, ratio)


def write_projection_csv(result: ProjectionResult, labels, path) -> None:
    """`pc1,pc2,label` rows suitable for external plotting."""
    labels = np.asarray(labels)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pc1", "pc2", "label"])
        for (p1, p2), y in zip(result.projected, labels):
            writer.writerow([repr(float(p1)), repr(float(p2)), int(y)])
