"""Synthetic imbalanced dataset generation, CSV ingestion, and
group-aware K-fold splitting.

Rows carry a group id (one id per acquisition sequence); all rows of a
group land in the same fold so that within-group correlation cannot
leak between train and validation.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (ConfigError, CsvHeaderError, CsvParseError,
                         DataError, EmptyDatasetError)

# Positive fraction observed in the motivating screening corpus:
# 271 positive frames out of 13,568.
DEFAULT_N_TOTAL = 13568
DEFAULT_POSITIVE_RATE = 271 / 13568
DEFAULT_N_GROUPS = 90

# Group offsets are drawn at this multiple of overlap_noise. Large on
# purpose: rows within a group are strongly correlated, so row-level
# splits would leak badly; splitting must happen at the group level.
GROUP_OFFSET_SCALE = 2.5


@dataclass
class GroupedDataset:
    """Feature rows with class labels and group ids."""

    features: np.ndarray  # (N, d_in) float64
    labels: np.ndarray  # (N,) int64
    groups: np.ndarray  # (N,) str

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.groups = np.asarray(self.groups)
        if self.features.ndim != 2:
            raise DataError("features must be 2-D")
        n = self.features.shape[0]
        if self.labels.shape != (n,) or self.groups.shape != (n,):
            raise DataError("features, labels, and groups must have equal row counts")
        if not np.all(np.isfinite(self.features)):
            raise DataError("features contain non-finite values")
        if n and self.labels.min() < 0:
            raise DataError("labels must be nonnegative")
        if any(len(str(g)) == 0 for g in self.groups):
            raise DataError("group ids must be nonempty")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d_in(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.n else 0

    def subset(self, idx) -> "GroupedDataset":
        idx = np.asarray(idx)
        return GroupedDataset(self.features[idx], self.labels[idx], self.groups[idx])


@dataclass(frozen=True)
class SynthConfig:
    """Two-Gaussian generator with group structure.

    Class means sit class_separation apart along feature 0; every row
    gets isotropic N(0, overlap_noise^2) noise plus a per-group offset
    at GROUP_OFFSET_SCALE times that scale, which correlates rows
    within a group (one offset per acquisition sequence).
    """

    n_total: int = DEFAULT_N_TOTAL
    positive_rate: float = DEFAULT_POSITIVE_RATE
    n_groups: int = DEFAULT_N_GROUPS
    d_in: int = 6
    class_separation: float = 5.0
    overlap_noise: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_total < 1:
            raise ConfigError("n_total must be >= 1")
        if not 0.0 < self.positive_rate < 1.0:
            raise ConfigError("positive_rate must be in (0, 1)")
        if not 1 <= self.n_groups <= self.n_total:
            raise ConfigError("n_groups must be in [1, n_total]")
        if self.d_in < 1:
            raise ConfigError("d_in must be >= 1")
        if self.class_separation < 0 or self.overlap_noise < 0:
            raise ConfigError("class_separation and overlap_noise must be >= 0")


def generate_synthetic(cfg: SynthConfig) -> GroupedDataset:
    """Deterministic per seed; positive count is exactly
    round(n_total * positive_rate)."""
    n_pos = int(round(cfg.n_total * cfg.positive_rate))
    if n_pos == 0:
        raise ConfigError("positive_rate rounds to zero positives")
    if n_pos == cfg.n_total:
        raise ConfigError("positive_rate rounds to zero negatives")

    rng = np.random.default_rng(cfg.seed)
    labels = np.zeros(cfg.n_total, dtype=np.int64)
    labels[:n_pos] = 1
    labels = labels[rng.permutation(cfg.n_total)]

    group_index = np.arange(cfg.n_total) % cfg.n_groups
    width = len(str(cfg.n_groups - 1))
    groups = np.array([f"g{g:0{width}d}" for g in group_index])

    means = np.zeros((2, cfg.d_in))
    means[0, 0] = -cfg.class_separation / 2.0
    means[1, 0] = cfg.class_separation / 2.0
    offsets = rng.normal(0.0, GROUP_OFFSET_SCALE * cfg.overlap_noise,
                         (cfg.n_groups, cfg.d_in))
    noise = rng.normal(0.0, cfg.overlap_noise, (cfg.n_total, cfg.d_in))
    features = means[labels] + offsets[group_index] + noise
    return GroupedDataset(features, labels, groups)


def load_csv(path) -> GroupedDataset:
    """Parse the `group_id,label,f0..f{d-1}` schema (UTF-8, '.' decimals)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvHeaderError(f"{path}: file is empty") from None
        if len(header) < 3 or header[0] != "group_id" or header[1] != "label":
            raise CsvHeaderError(
                f"{path}: header must start with group_id,label followed by feature columns")
        expected = [f"f{i}" for i in range(len(header) - 2)]
        if header[2:] != expected:
            raise CsvHeaderError(f"{path}: feature columns must be named f0..f{len(header) - 3}")
        d = len(expected)

        groups, labels, rows = [], [], []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 2 + d:
                raise CsvParseError(f"{path} row {line_no}: expected {2 + d} fields, got {len(row)}")
            if not row[0]:
                raise CsvParseError(f"{path} row {line_no}: empty group_id")
            try:
                label = int(row[1])
                feats = [float(v) for v in row[2:]]
            except ValueError as exc:
                raise CsvParseError(f"{path} row {line_no}: {exc}") from exc
            if label < 0:
                raise CsvParseError(f"{path} row {line_no}: negative label")
            if not all(math.isfinite(v) for v in feats):
                raise CsvParseError(f"{path} row {line_no}: non-finite feature value")
            groups.append(row[0])
            labels.append(label)
            rows.append(feats)
    if not rows:
        raise EmptyDatasetError(f"{path}: no data rows")
    return GroupedDataset(np.asarray(rows), np.asarray(labels), np.asarray(groups))


def write_csv(data: GroupedDataset, path) -> None:
    """Inverse of load_csv; floats are written with full repr precision."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group_id", "label"] + [f"f{i}" for i in range(data.d_in)])
        for g, y, row in zip(data.groups, data.labels, data.features):
            writer.writerow([g, int(y)] + [repr(float(v)) for v in row])


def group_kfold(data: GroupedDataset, k: int, seed: int) -> list:
    """Partition groups into k folds; returns (train_idx, val_idx) pairs.

    Groups are shuffled by seed and dealt into folds of near-equal group
    count. No group ever appears on both sides of a fold, and the val
    folds partition the row set.
    """
    if k < 2:
        raise ConfigError("k must be >= 2")
    unique_groups = np.unique(data.groups)
    if unique_groups.shape[0] < k:
        raise DataError(f"need at least {k} distinct groups, have {unique_groups.shape[0]}")
    rng = np.random.default_rng(seed)
    shuffled = unique_groups[rng.permutation(unique_groups.shape[0])]

    n_groups = shuffled.shape[0]
    base, rem = divmod(n_groups, k)
    folds = []
    start = 0
    for fold in range(k):
        size = base + (1 if fold < rem else 0)
        fold_groups = set(shuffled[start:start + size])
        start += size
        val_mask = np.fromiter((g in fold_groups for g in data.groups),
                               dtype=bool, count=data.n)
        folds.append((np.nonzero(~val_mask)[0], np.nonzero(val_mask)[0]))
    return folds
