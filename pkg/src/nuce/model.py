"""Small deterministic classifier: optional tanh feature layer plus a
linear head, trained with minibatch Adam, an epoch-level cosine schedule,
and early stopping on validation macro-F1.

Everything is seeded (init, shuffling, anchor fallback), so identical
(data, config) inputs reproduce bit-identical runs. Anchors are part of
the parameter set for every loss kind and are initialized to the class
means of the first training batch; losses without an anchor term simply
leave them untouched.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .data import GroupedDataset
from .exceptions import ConfigError, DataError, ShapeError
from .linalg import matmul, softmax_rows
from .losses import AnchorSet, LossConfig, evaluate_loss
from .metrics import confusion, metric_summary

SCHEDULES = ("constant", "cosine")

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class ModelParams:
    """Parameter blocks; extractor_* are None when the model is linear."""

    extractor_w: np.ndarray | None
    extractor_b: np.ndarray | None
    head_w: np.ndarray
    anchors: AnchorSet

    @property
    def d_in(self) -> int:
        if self.extractor_w is not None:
            return self.extractor_w.shape[0]
        return self.head_w.shape[1]

    @property
    def n_classes(self) -> int:
        return self.head_w.shape[0]

    def copy(self) -> "ModelParams":
        return ModelParams(
            extractor_w=None if self.extractor_w is None else self.extractor_w.copy(),
            extractor_b=None if self.extractor_b is None else self.extractor_b.copy(),
            head_w=self.head_w.copy(),
            anchors=AnchorSet(self.anchors.anchors.copy()),
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 128
    learning_rate: float = 1e-3
    schedule: str = "cosine"
    early_stop_patience: int = 3
    seed: int = 0
    hidden_dim: int = 10  # 0 disables the extractor (features used as-is)
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"schedule must be one of {SCHEDULES}")
        if self.early_stop_patience < 0:
            raise ConfigError("early_stop_patience must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.hidden_dim < 0:
            raise ConfigError("hidden_dim must be >= 0")


@dataclass
class TrainReport:
    train_loss: list
    val_metrics: list  # one metric_summary dict per completed epoch
    anchor_dist: list  # mean ||h_i - a_{y_i}|| over the training set per epoch
    stopped_epoch: int  # number of epochs actually run
    best_epoch: int  # 0-based epoch whose params are returned
    params: ModelParams


def forward(params: ModelParams, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Embed and classify: H = tanh(X E + b) (or X itself), P = softmax(H W^T)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.d_in:
        raise ShapeError(f"X is {X.shape}, expected (*, {params.d_in})")
    if params.extractor_w is not None:
        H = np.tanh(matmul(X, params.extractor_w) + params.extractor_b)
    else:
        H = X
    P = softmax_rows(matmul(H, params.head_w.T))
    return H, P


def predict(params: ModelParams, X: np.ndarray) -> np.ndarray:
    _, P = forward(params, X)
    return np.argmax(P, axis=1)


def cosine_lr(epoch: int, total: int, base_lr: float) -> float:
    """base_lr * 0.5 * (1 + cos(pi * epoch / total)), epoch in [0, total)."""
    if epoch < 0 or epoch >= total:
        raise ConfigError(f"epoch {epoch} outside [0, {total})")
    return base_lr * 0.5 * (1.0 + math.cos(math.pi * epoch / total))


@dataclass
class AdamState:
    """First/second moment estimates per parameter block, plus step count."""

    m: dict
    v: dict
    step_count: int = 0

    @classmethod
    def for_params(cls, blocks: dict) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in blocks.items()},
            v={k: np.zeros_like(p) for k, p in blocks.items()},
        )


def adam_step(state: AdamState, blocks: dict, grads: dict, lr_t: float) -> None:
    """One bias-corrected Adam update, applied to the blocks in place."""
    state.step_count += 1
    t = state.step_count
    for name, g in grads.items():
        if g.size == 0:
            continue
        if g.shape != blocks[name].shape:
            raise ShapeError(f"gradient for {name!r} is {g.shape}, expected {blocks[name].shape}")
        m = state.m[name]
        v = state.v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * (g * g)
        m_hat = m / (1.0 - ADAM_BETA1 ** t)
        v_hat = v / (1.0 - ADAM_BETA2 ** t)
        blocks[name] -= lr_t * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def _one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], k))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def _init_anchors(H: np.ndarray, labels: np.ndarray, k: int, rng) -> np.ndarray:
    """Class means of the given batch; seeded N(0, 0.01^2) for absent classes."""
    d = H.shape[1]
    anchors = np.zeros((k, d))
    for c in range(k):
        rows = H[labels == c]
        if rows.shape[0] > 0:
            anchors[c] = rows.mean(axis=0)
        else:
            anchors[c] = rng.normal(0.0, 0.01, d)
    return anchors


def _mean_anchor_distance(params: ModelParams, X, labels) -> float:
    H, _ = forward(params, X)
    diff = H - params.anchors.anchors[labels]
    return float(np.mean(np.sqrt(np.sum(diff * diff, axis=1))))


def train(data: GroupedDataset, cfg: TrainConfig,
          val: GroupedDataset | None = None) -> TrainReport:
    """Minibatch training; returns the best-validation parameters.

    Validation metrics drive early stopping: after `early_stop_patience`
    consecutive epochs without a macro-F1 improvement, training stops.
    When no validation set is given the training set is evaluated
    instead (useful for the desk-scale demos).
    """
    if data.n == 0:
        raise DataError("training set is empty")
    eval_set = val if val is not None else data
    k = int(max(data.labels.max(), eval_set.labels.max())) + 1
    if k < 2:
        raise DataError("training needs at least 2 classes")
    present = np.unique(data.labels)
    missing = sorted(set(range(k)) - set(int(c) for c in present))
    if missing:
        raise DataError(f"training split has no samples for class(es) {missing}")

    rng = np.random.default_rng(cfg.seed)
    x = data.features
    n, d_in = x.shape
    if cfg.hidden_dim > 0:
        d = cfg.hidden_dim
        extractor_w = rng.normal(0.0, 1.0 / math.sqrt(d_in), (d_in, d))
        extractor_b = np.zeros(d)
    else:
        d = d_in
        extractor_w = None
        extractor_b = None
    head_w = rng.normal(0.0, 1.0 / math.sqrt(d), (k, d))
    params = ModelParams(extractor_w, extractor_b, head_w,
                         AnchorSet(np.zeros((k, d))))

    blocks = {"head_w": params.head_w, "anchors": params.anchors.anchors}
    if extractor_w is not None:
        blocks["extractor_w"] = params.extractor_w
        blocks["extractor_b"] = params.extractor_b
    state = AdamState.for_params(blocks)

    train_loss = []
    val_metrics = []
    anchor_dist = []
    best_f1 = -1.0
    best_epoch = 0
    best_params = None
    bad_epochs = 0
    anchors_ready = False
    stopped_epoch = 0

    for epoch in range(cfg.epochs):
        if cfg.schedule == "cosine":
            lr_t = cosine_lr(epoch, cfg.epochs, cfg.learning_rate)
        else:
            lr_t = cfg.learning_rate
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb = x[idx]
            yb = data.labels[idx]
            hb, _ = forward(params, xb)
            if not anchors_ready:
                params.anchors.anchors[...] = _init_anchors(hb, yb, k, rng)
                anchors_ready = True
            out = evaluate_loss(hb, params.head_w, _one_hot(yb, k),
                                params.anchors, cfg.loss)
            grads = {"head_w": out.grad_W, "anchors": out.grad_A}
            if extractor_w is not None:
                dz = out.grad_H * (1.0 - hb * hb)  # tanh backward
                grads["extractor_w"] = matmul(xb.T, dz)
                grads["extractor_b"] = dz.sum(axis=0)
            adam_step(state, blocks, grads, lr_t)
            epoch_loss += out.total * idx.shape[0]
        train_loss.append(epoch_loss / n)
        anchor_dist.append(_mean_anchor_distance(params, x, data.labels))

        preds = predict(params, eval_set.features)
        cm = confusion(eval_set.labels, preds, k)
        summary = metric_summary(cm)
        val_metrics.append(summary)
        stopped_epoch = epoch + 1

        if summary["f1_macro"] > best_f1:
            best_f1 = summary["f1_macro"]
            best_epoch = epoch
            best_params = params.copy()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= cfg.early_stop_patience:
                break

    return TrainReport(
        train_loss=train_loss,
        val_metrics=val_metrics,
        anchor_dist=anchor_dist,
        stopped_epoch=stopped_epoch,
        best_epoch=best_epoch,
        params=best_params,
    )


def _encode(arr: np.ndarray | None):
    if arr is None:
        return None
    if arr.ndim == 1:
        return {"len": arr.shape[0], "data": arr.tolist()}
    return {"rows": arr.shape[0], "cols": arr.shape[1], "data": arr.ravel().tolist()}


def _decode_matrix(obj) -> np.ndarray | None:
    if obj is None:
        return None
    data = np.asarray(obj["data"], dtype=np.float64)
    if "len" in obj:
        if data.shape[0] != obj["len"]:
            raise ConfigError("vector length does not match header")
        return data
    if data.shape[0] != obj["rows"] * obj["cols"]:
        raise ConfigError("matrix data does not match shape header")
    return data.reshape(obj["rows"], obj["cols"])


def save_model(params: ModelParams, path) -> None:
    """Flat JSON document: shape headers plus row-major values."""
    doc = {
        "extractor_w": _encode(params.extractor_w),
        "extractor_b": _encode(params.extractor_b),
        "head_w": _encode(params.head_w),
        "anchors": _encode(params.anchors.anchors),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path) -> ModelParams:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"model file {path} is not valid JSON: {exc}") from exc
    try:
        params = ModelParams(
            extractor_w=_decode_matrix(doc["extractor_w"]),
            extractor_b=_decode_matrix(doc["extractor_b"]),
            head_w=_decode_matrix(doc["head_w"]),
            anchors=AnchorSet(_decode_matrix(doc["anchors"])),
        )
    except KeyError as exc:
        raise ConfigError(f"model file {path} is missing field {exc}") from exc
    if not np.all(np.isfinite(params.head_w)):
        raise ConfigError("model parameters contain non-finite values")
    return params
