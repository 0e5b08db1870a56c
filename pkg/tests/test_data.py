import numpy as np
import pytest

from nuce.data import (GroupedDataset, SynthConfig, generate_synthetic,
                       group_kfold, load_csv, write_csv)
from nuce.exceptions import (ConfigError, CsvHeaderError, CsvParseError,
                             DataError, EmptyDatasetError)


def test_default_corpus_scale_positive_count_is_exact():
    data = generate_synthetic(SynthConfig())
    assert data.n == 13568
    assert int(data.labels.sum()) == 271
    assert len(set(data.groups.tolist())) == 90


def test_positive_count_exact_across_seeds():
    for seed in range(5):
        cfg = SynthConfig(n_total=997, positive_rate=0.137, n_groups=13, seed=seed)
        data = generate_synthetic(cfg)
        assert int(data.labels.sum()) == round(997 * 0.137)


def test_wide_separation_admits_threshold_classifier():
    data = generate_synthetic(SynthConfig(
        n_total=4000, positive_rate=0.1, n_groups=40,
        class_separation=10.0, overlap_noise=0.1, seed=1))
    preds = (data.features[:, 0] > 0.0).astype(int)
    assert float(np.mean(preds == data.labels)) >= 0.999


def test_generator_deterministic_per_seed():
    a = generate_synthetic(SynthConfig(n_total=100, positive_rate=0.2, n_groups=5, seed=8))
    b = generate_synthetic(SynthConfig(n_total=100, positive_rate=0.2, n_groups=5, seed=8))
    c = generate_synthetic(SynthConfig(n_total=100, positive_rate=0.2, n_groups=5, seed=9))
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    assert not np.array_equal(a.features, c.features)


def test_zero_positive_rounding_rejected():
    with pytest.raises(ConfigError):
        generate_synthetic(SynthConfig(n_total=10, positive_rate=0.01, n_groups=2))


def test_synth_config_validation():
    with pytest.raises(ConfigError):
        SynthConfig(positive_rate=0.0)
    with pytest.raises(ConfigError):
        SynthConfig(n_groups=0)
    with pytest.raises(ConfigError):
        SynthConfig(n_total=10, n_groups=11)


def test_load_csv_well_formed(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("group_id,label,f0,f1\ng1,0,1.5,2.5\ng1,1,-1.0,0.25\ng2,0,0.0,3.5\n")
    data = load_csv(path)
    assert data.n == 3
    assert data.d_in == 2
    assert data.labels.tolist() == [0, 1, 0]
    assert data.groups.tolist() == ["g1", "g1", "g2"]


def test_load_csv_nan_names_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("group_id,label,f0\ng1,0,1.0\ng1,1,NaN\n")
    with pytest.raises(CsvParseError, match="row 3"):
        load_csv(path)


def test_load_csv_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("group_id,label,f0\n")
    with pytest.raises(EmptyDatasetError):
        load_csv(path)


def test_load_csv_bad_headers(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("id,label,f0\ng,0,1\n")
    with pytest.raises(CsvHeaderError):
        load_csv(path)
    path.write_text("group_id,label\ng,0\n")
    with pytest.raises(CsvHeaderError):
        load_csv(path)
    path.write_text("group_id,label,f0,f2\ng,0,1,2\n")
    with pytest.raises(CsvHeaderError):
        load_csv(path)


def test_load_csv_ragged_row(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("group_id,label,f0,f1\ng1,0,1.0\n")
    with pytest.raises(CsvParseError, match="row 2"):
        load_csv(path)


def test_csv_round_trip(tmp_path):
    data = generate_synthetic(SynthConfig(n_total=50, positive_rate=0.2, n_groups=5, seed=2))
    path = tmp_path / "rt.csv"
    write_csv(data, path)
    loaded = load_csv(path)
    assert np.array_equal(loaded.features, data.features)
    assert np.array_equal(loaded.labels, data.labels)
    assert loaded.groups.tolist() == data.groups.tolist()


def test_group_kfold_balanced_sizes():
    data = generate_synthetic(SynthConfig())
    folds = group_kfold(data, 5, seed=0)
    assert len(folds) == 5
    for _, val_idx in folds:
        assert len(set(data.groups[val_idx].tolist())) == 18  # 90 groups / 5


def test_group_kfold_leave_one_group_out():
    data = generate_synthetic(SynthConfig(n_total=60, positive_rate=0.25, n_groups=6, seed=1))
    folds = group_kfold(data, 6, seed=3)
    for _, val_idx in folds:
        assert len(set(data.groups[val_idx].tolist())) == 1


def test_group_kfold_disjoint_and_covering():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n_groups = int(rng.integers(4, 12))
        n = int(rng.integers(n_groups, 80))
        data = GroupedDataset(
            rng.normal(size=(n, 2)),
            rng.integers(0, 2, n),
            np.array([f"g{int(v)}" for v in rng.integers(0, n_groups, n)]))
        k = int(rng.integers(2, min(5, len(set(data.groups.tolist()))) + 1))
        folds = group_kfold(data, k, seed=int(rng.integers(0, 100)))
        seen = []
        for train_idx, val_idx in folds:
            assert not set(data.groups[train_idx]) & set(data.groups[val_idx])
            seen.extend(val_idx.tolist())
        assert sorted(seen) == list(range(n))


def test_group_kfold_too_few_groups():
    data = generate_synthetic(SynthConfig(n_total=30, positive_rate=0.3, n_groups=3, seed=0))
    with pytest.raises(DataError):
        group_kfold(data, 4, seed=0)
    with pytest.raises(ConfigError):
        group_kfold(data, 1, seed=0)


def test_grouped_dataset_validation():
    with pytest.raises(DataError):
        GroupedDataset(np.zeros((2, 2)), np.array([0]), np.array(["a", "b"]))
    with pytest.raises(DataError):
        GroupedDataset(np.array([[np.inf, 0.0]]), np.array([0]), np.array(["a"]))
    with pytest.raises(DataError):
        GroupedDataset(np.zeros((1, 1)), np.array([0]), np.array([""]))
