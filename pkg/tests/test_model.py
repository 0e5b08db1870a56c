import json
import math

import numpy as np
import pytest

from nuce.data import SynthConfig, generate_synthetic
from nuce.exceptions import ConfigError, DataError, ShapeError
from nuce.losses import AnchorSet, LossConfig
from nuce.model import (AdamState, ModelParams, TrainConfig, adam_step,
                        cosine_lr, forward, load_model, predict, save_model,
                        train)


def linear_params(head):
    head = np.asarray(head, dtype=np.float64)
    return ModelParams(None, None, head, AnchorSet(np.zeros_like(head)))


def test_forward_saturation():
    params = linear_params(np.eye(2))
    _, p = forward(params, np.array([[10.0, -10.0]]))
    assert abs(p[0, 0] - 1.0) < 1e-4
    assert p[0, 1] < 1e-4


def test_forward_zero_input_uniform():
    params = linear_params(np.eye(3))
    _, p = forward(params, np.zeros((4, 3)))
    assert np.abs(p - 1.0 / 3.0).max() < 1e-15


def test_forward_rows_normalized():
    rng = np.random.default_rng(0)
    params = ModelParams(rng.normal(size=(5, 4)), np.zeros(4),
                         rng.normal(size=(3, 4)), AnchorSet(np.zeros((3, 4))))
    _, p = forward(params, rng.normal(size=(20, 5)))
    assert np.abs(p.sum(axis=1) - 1.0).max() < 1e-12


def test_forward_shape_error():
    params = linear_params(np.eye(2))
    with pytest.raises(ShapeError):
        forward(params, np.zeros((2, 3)))


def test_cosine_schedule():
    assert cosine_lr(0, 10, 1e-3) == 1e-3
    assert abs(cosine_lr(5, 10, 1e-3) - 0.5e-3) < 1e-15
    expected = 1e-3 * 0.5 * (1.0 + math.cos(0.9 * math.pi))
    assert abs(cosine_lr(9, 10, 1e-3) - expected) < 1e-18
    with pytest.raises(ConfigError):
        cosine_lr(10, 10, 1e-3)


def test_adam_zero_gradient_is_identity():
    blocks = {"w": np.array([1.0, -2.0, 3.0])}
    before = blocks["w"].copy()
    state = AdamState.for_params(blocks)
    adam_step(state, blocks, {"w": np.zeros(3)}, 0.01)
    assert np.array_equal(blocks["w"], before)


def test_adam_first_step_magnitude():
    blocks = {"w": np.zeros(4)}
    state = AdamState.for_params(blocks)
    adam_step(state, blocks, {"w": np.full(4, 3.7)}, 0.01)
    # bias correction makes the first update ~lr regardless of g's scale
    assert np.abs(np.abs(blocks["w"]) - 0.01).max() < 1e-6


def test_adam_minimizes_quadratic_bowl():
    blocks = {"x": np.array([5.0])}
    state = AdamState.for_params(blocks)
    losses = []
    for _ in range(10):
        losses.append(float(blocks["x"][0] ** 2))
        adam_step(state, blocks, {"x": 2.0 * blocks["x"]}, 0.5)
    assert all(b < a for a, b in zip(losses, losses[1:]))


def small_dataset(seed=0):
    return generate_synthetic(SynthConfig(
        n_total=300, positive_rate=0.3, n_groups=12, d_in=4,
        class_separation=6.0, overlap_noise=0.5, seed=seed))


def test_train_deterministic_given_seed():
    data = small_dataset()
    cfg = TrainConfig(epochs=4, batch_size=32, seed=9)
    r1 = train(data, cfg)
    r2 = train(data, cfg)
    assert r1.train_loss == r2.train_loss
    assert r1.val_metrics == r2.val_metrics
    assert np.array_equal(r1.params.head_w, r2.params.head_w)
    assert np.array_equal(r1.params.extractor_w, r2.params.extractor_w)
    assert np.array_equal(r1.params.anchors.anchors, r2.params.anchors.anchors)


def test_train_separable_blobs_reaches_high_accuracy():
    data = generate_synthetic(SynthConfig(
        n_total=200, positive_rate=0.5, n_groups=10, d_in=2,
        class_separation=10.0, overlap_noise=0.1, seed=3))
    report = train(data, TrainConfig(epochs=10, batch_size=32, seed=0))
    preds = predict(report.params, data.features)
    assert float(np.mean(preds == data.labels)) >= 0.99


def test_train_single_epoch_with_zero_patience():
    data = small_dataset()
    report = train(data, TrainConfig(epochs=1, early_stop_patience=0, seed=1))
    assert report.stopped_epoch == 1
    assert len(report.train_loss) == 1


def test_train_rejects_missing_class():
    data = small_dataset()
    only_zero = data.subset(np.nonzero(data.labels == 0)[0])
    with pytest.raises(DataError):  # single-class training set
        train(only_zero, TrainConfig(epochs=1))
    with pytest.raises(DataError):  # val holds a class train never saw
        train(only_zero, TrainConfig(epochs=1), data)


def test_early_stop_returns_best_epoch_params():
    data = small_dataset(seed=4)
    report = train(data, TrainConfig(epochs=10, early_stop_patience=2, seed=5))
    best_recorded = max(m["f1_macro"] for m in report.val_metrics)
    assert report.val_metrics[report.best_epoch]["f1_macro"] == best_recorded


def test_anchor_distance_shrinks_with_contraction():
    data = generate_synthetic(SynthConfig(
        n_total=200, positive_rate=0.5, n_groups=10, d_in=2,
        class_separation=10.0, overlap_noise=0.1, seed=3))
    cfg = TrainConfig(epochs=10, batch_size=32, seed=3,
                      loss=LossConfig(lambda_r=1.0, lambda_c=0.5, gamma=2.0))
    report = train(data, cfg)
    assert report.anchor_dist[-1] < report.anchor_dist[0]


def test_model_json_round_trip(tmp_path):
    data = small_dataset()
    report = train(data, TrainConfig(epochs=2, seed=2))
    path = tmp_path / "model.json"
    save_model(report.params, path)
    loaded = load_model(path)
    assert np.array_equal(loaded.head_w, report.params.head_w)
    assert np.array_equal(loaded.extractor_w, report.params.extractor_w)
    assert np.array_equal(loaded.extractor_b, report.params.extractor_b)
    assert np.array_equal(loaded.anchors.anchors, report.params.anchors.anchors)
    doc = json.loads(path.read_text())
    assert doc["head_w"]["rows"] == 2  # flat shape header


def test_load_model_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("not json")
    with pytest.raises(ConfigError):
        load_model(path)


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(epochs=0)
    with pytest.raises(ConfigError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ConfigError):
        TrainConfig(schedule="linear")
