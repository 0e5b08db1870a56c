"""Experiment configuration parsing and the seeds-by-folds driver used
by the CLI commands.

Configs are flat INI files so experiment provenance stays diffable:

    [data]                    ; either csv = path, or generator knobs
    n_total = 13568
    [train]
    epochs = 10
    [loss]
    kind = nuce
    [experiment]
    folds = 5
    seeds = 0,1,2

The fully resolved configuration is echoed into every output directory.
"""

import configparser
import dataclasses
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import GroupedDataset, SynthConfig, generate_synthetic, group_kfold, load_csv
from .exceptions import ConfigError
from .losses import LossConfig
from .model import TrainConfig, train

METRIC_COLUMNS = ("accuracy", "precision_macro", "recall_macro", "f1_macro",
                  "precision_weighted", "recall_weighted", "f1_weighted")

ABLATION_LABELS = ("cross_entropy", "uncertainty_weighting", "full_nuce")

# (lambda_r, lambda_c, gamma) operating points swept by default
DEFAULT_SWEEP_GRID = (
    (0.5, 0.5, 2.0),
    (1.0, 0.0, 2.0),
    (1.0, 0.5, 1.0),
    (1.0, 0.5, 2.0),
    (1.0, 1.0, 2.0),
    (1.5, 0.5, 2.0),
)


@dataclass
class ExperimentConfig:
    csv_path: str | None = None
    synth: SynthConfig = field(default_factory=SynthConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    folds: int = 5
    seeds: tuple = (0, 1, 2)
    out: str | None = None
    sweep_grid: tuple = DEFAULT_SWEEP_GRID
    detect_input: str | None = None
    detect_taus: tuple = ()
    pca_model: str | None = None
    pca_data: str | None = None

    def __post_init__(self):
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be >= 0")
        if not self.sweep_grid:
            raise ConfigError("sweep grid is empty")

    def load_dataset(self) -> GroupedDataset:
        if self.csv_path is not None:
            if not Path(self.csv_path).exists():
                raise ConfigError(f"csv file not found: {self.csv_path}")
            return load_csv(self.csv_path)
        return generate_synthetic(self.synth)


def _coerce(section, key, kind, default):
    if key not in section:
        return default
    raw = section[key]
    try:
        if kind is bool:
            return section.getboolean(key)
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def _float_list(raw: str) -> tuple:
    try:
        return tuple(float(v.strip()) for v in raw.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad list value: {raw!r}") from exc


def parse_experiment_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        read = parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not read:
        raise ConfigError(f"config file not found: {path}")

    data_sec = parser["data"] if parser.has_section("data") else {}
    csv_path = data_sec.get("csv") if data_sec else None
    synth_keys = ("n_total", "positive_rate", "n_groups", "d_in",
                  "class_separation", "overlap_noise", "seed")
    if csv_path and any(k in data_sec for k in synth_keys):
        raise ConfigError("config must define exactly one data source: "
                          "csv or generator settings, not both")
    synth = SynthConfig(
        n_total=_coerce(data_sec, "n_total", int, SynthConfig.n_total),
        positive_rate=_coerce(data_sec, "positive_rate", float, SynthConfig.positive_rate),
        n_groups=_coerce(data_sec, "n_groups", int, SynthConfig.n_groups),
        d_in=_coerce(data_sec, "d_in", int, SynthConfig.d_in),
        class_separation=_coerce(data_sec, "class_separation", float,
                                 SynthConfig.class_separation),
        overlap_noise=_coerce(data_sec, "overlap_noise", float, SynthConfig.overlap_noise),
        seed=_coerce(data_sec, "seed", int, SynthConfig.seed),
    ) if not csv_path else SynthConfig()

    # defaults come from the dataclasses so the CLI can never drift
    loss_sec = parser["loss"] if parser.has_section("loss") else {}
    loss_default = LossConfig()
    loss = LossConfig(
        lambda_r=_coerce(loss_sec, "lambda_r", float, loss_default.lambda_r),
        lambda_c=_coerce(loss_sec, "lambda_c", float, loss_default.lambda_c),
        gamma=_coerce(loss_sec, "gamma", float, loss_default.gamma),
        kind=loss_sec.get("kind", loss_default.kind) if loss_sec else loss_default.kind,
    )

    train_sec = parser["train"] if parser.has_section("train") else {}
    train_default = TrainConfig()
    train_cfg = TrainConfig(
        epochs=_coerce(train_sec, "epochs", int, train_default.epochs),
        batch_size=_coerce(train_sec, "batch_size", int, train_default.batch_size),
        learning_rate=_coerce(train_sec, "learning_rate", float,
                              train_default.learning_rate),
        schedule=(train_sec.get("schedule", train_default.schedule)
                  if train_sec else train_default.schedule),
        early_stop_patience=_coerce(train_sec, "early_stop_patience", int,
                                    train_default.early_stop_patience),
        hidden_dim=_coerce(train_sec, "hidden_dim", int, train_default.hidden_dim),
        loss=loss,
    )

    exp_sec = parser["experiment"] if parser.has_section("experiment") else {}
    seeds_raw = exp_sec.get("seeds", "0,1,2") if exp_sec else "0,1,2"
    try:
        seeds = tuple(int(s.strip()) for s in seeds_raw.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"bad seeds list: {seeds_raw!r}") from exc

    sweep_grid = DEFAULT_SWEEP_GRID
    if parser.has_section("sweep"):
        sweep_sec = parser["sweep"]
        lists = [_float_list(sweep_sec.get(k, "")) for k in ("lambda_r", "lambda_c", "gamma")]
        if any(lists):
            if not all(lists):
                raise ConfigError("sweep grid needs lambda_r, lambda_c, and gamma lists")
            sweep_grid = tuple((lr, lc, g) for lr in lists[0]
                               for lc in lists[1] for g in lists[2])

    detect_sec = parser["detect"] if parser.has_section("detect") else {}
    pca_sec = parser["pca"] if parser.has_section("pca") else {}
    return ExperimentConfig(
        csv_path=csv_path,
        synth=synth,
        train=train_cfg,
        folds=_coerce(exp_sec, "folds", int, 5),
        seeds=seeds,
        out=exp_sec.get("out") if exp_sec else None,
        sweep_grid=sweep_grid,
        detect_input=detect_sec.get("input") if detect_sec else None,
        detect_taus=_float_list(detect_sec.get("taus", "")) if detect_sec else (),
        pca_model=pca_sec.get("model") if pca_sec else None,
        pca_data=pca_sec.get("data") if pca_sec else None,
    )


def echo_config(cfg: ExperimentConfig, path) -> None:
    """Write the fully resolved configuration for provenance."""
    parser = configparser.ConfigParser()
    if cfg.csv_path:
        parser["data"] = {"csv": cfg.csv_path}
    else:
        parser["data"] = {k: repr(v) for k, v in dataclasses.asdict(cfg.synth).items()}
    train_dict = dataclasses.asdict(cfg.train)
    loss_dict = train_dict.pop("loss")
    parser["train"] = {k: repr(v) if isinstance(v, float) else str(v)
                       for k, v in train_dict.items()}
    parser["loss"] = {k: repr(v) if isinstance(v, float) else str(v)
                      for k, v in loss_dict.items()}
    parser["experiment"] = {
        "folds": str(cfg.folds),
        "seeds": ",".join(str(s) for s in cfg.seeds),
    }
    parser["sweep"] = {
        "grid": "; ".join(f"{lr!r},{lc!r},{g!r}" for lr, lc, g in cfg.sweep_grid),
    }
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


def run_cross_validation(data: GroupedDataset, train_cfg: TrainConfig,
                         folds: int, seeds) -> tuple:
    """Train seeds x folds models; returns (rows, reports).

    Fold assignment depends only on the experiment seed, so two loss
    configurations run with the same seeds see identical folds (paired
    comparisons). Each run trains with its own derived seed.
    """
    rows = []
    reports = []
    for seed in seeds:
        for fold_idx, (tr, va) in enumerate(group_kfold(data, folds, seed)):
            run_cfg = replace(train_cfg, seed=1000 * seed + fold_idx)
            report = train(data.subset(tr), run_cfg, data.subset(va))
            best = report.val_metrics[report.best_epoch]
            rows.append({"seed": seed, "fold": fold_idx, **best})
            reports.append(report)
    return rows, reports


def summarize_rows(rows) -> dict:
    """Mean and population std per metric column, in stable order."""
    out = {}
    for col in METRIC_COLUMNS:
        values = np.array([row[col] for row in rows], dtype=np.float64)
        out[col] = {"mean": float(values.mean()), "std": float(values.std())}
    return out


def ablation_configs(base: LossConfig) -> list:
    """The progressive configurations: CE, CE plus uncertainty
    weighting, and the full objective with contraction."""
    return [
        ("cross_entropy", replace(base, kind="nuce", lambda_c=0.0, gamma=0.0)),
        ("uncertainty_weighting", replace(base, kind="nuce", lambda_c=0.0)),
        ("full_nuce", replace(base, kind="nuce")),
    ]


def write_rows_csv(path, rows, columns) -> None:
    """Fixed header and column order; floats keep full repr precision."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            rendered = []
            for col in columns:
                v = row[col]
                rendered.append(repr(v) if isinstance(v, float) else str(v))
            fh.write(",".join(rendered) + "\n")


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
