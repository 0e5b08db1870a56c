"""Command-line experiment runner.

Subcommands: train, ablation, sweep, gradcheck, detect-eval, pca.
Exit codes: 0 success, 1 check failure, 2 input/config error,
3 data error. All outputs are deterministic given (config, seed):
rerunning a command reproduces every file byte for byte.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, detection, report
from .exceptions import ConfigError, DataError, ShapeError
from .experiment import (METRIC_COLUMNS, ExperimentConfig,
                         ablation_configs, echo_config, parse_experiment_config,
                         run_cross_validation, summarize_rows, write_json,
                         write_rows_csv)
from .gradcheck import TOLERANCE, gradient_check_suite
from .model import forward, load_model, save_model
from .data import load_csv


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        return ExperimentConfig()
    if not Path(args.config).exists():
        raise ConfigError(f"config file not found: {args.config}")
    cfg = parse_experiment_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seeds=(args.seed,))
    return cfg


def _out_dir(args, cfg=None) -> Path:
    out = args.out or (cfg.out if cfg is not None else None)
    if not out:
        raise ConfigError("no output directory: pass --out or set [experiment] out")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_train(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    data = cfg.load_dataset()
    rows, reports = run_cross_validation(data, cfg.train, cfg.folds, cfg.seeds)
    write_rows_csv(out / "metrics.csv", rows, ("seed", "fold") + METRIC_COLUMNS)
    write_json(out / "summary.json", summarize_rows(rows))
    echo_config(cfg, out / "config_resolved.ini")
    histories = [(f"s{row['seed']}-f{row['fold']}", rep.train_loss)
                 for row, rep in zip(rows, reports)]
    report.loss_curves_figure(histories, out / "train_loss.svg")
    best = max(range(len(rows)), key=lambda i: rows[i]["f1_macro"])
    save_model(reports[best].params, out / "model.json")
    return 0


def _run_labeled_configs(cfg: ExperimentConfig, labeled, out: Path) -> list:
    """Shared driver for ablation and sweep: one aggregated row per config."""
    data = cfg.load_dataset()
    agg_rows = []
    run_rows = []
    for label, loss_cfg in labeled:
        train_cfg = replace(cfg.train, loss=loss_cfg)
        rows, _ = run_cross_validation(data, train_cfg, cfg.folds, cfg.seeds)
        summary = summarize_rows(rows)
        agg_rows.append({
            "config": label,
            "lambda_r": loss_cfg.lambda_r,
            "lambda_c": loss_cfg.lambda_c,
            "gamma": loss_cfg.gamma,
            **{col: summary[col]["mean"] for col in METRIC_COLUMNS},
        })
        for row in rows:
            run_rows.append({"config": label, **row})
    write_rows_csv(out / "runs.csv", run_rows,
                   ("config", "seed", "fold") + METRIC_COLUMNS)
    return agg_rows


def cmd_ablation(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    labeled = ablation_configs(cfg.train.loss)
    agg = _run_labeled_configs(cfg, labeled, out)
    columns = ("config", "lambda_r", "lambda_c", "gamma") + METRIC_COLUMNS
    write_rows_csv(out / "metrics.csv", agg, columns)
    write_json(out / "summary.json", {row["config"]: {c: row[c] for c in METRIC_COLUMNS}
                                      for row in agg})
    echo_config(cfg, out / "config_resolved.ini")
    report.metric_bar_figure([row["config"] for row in agg],
                             [row["f1_macro"] for row in agg],
                             "macro F1", out / "macro_f1.svg")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    labeled = [(f"lr{lr}_lc{lc}_g{g}", replace(cfg.train.loss, kind="nuce",
                                               lambda_r=lr, lambda_c=lc, gamma=g))
               for lr, lc, g in cfg.sweep_grid]
    agg = _run_labeled_configs(cfg, labeled, out)
    agg.sort(key=lambda row: -row["f1_macro"])  # stable: ties keep grid order
    columns = ("config", "lambda_r", "lambda_c", "gamma") + METRIC_COLUMNS
    write_rows_csv(out / "metrics.csv", agg, columns)
    write_json(out / "summary.json",
               {"best": agg[0]["config"], "rows": agg})
    echo_config(cfg, out / "config_resolved.ini")
    report.metric_bar_figure([row["config"] for row in agg],
                             [row["f1_macro"] for row in agg],
                             "macro F1", out / "macro_f1.svg")
    return 0


def cmd_gradcheck(args) -> int:
    rows = gradient_check_suite(seed=args.seed if args.seed is not None else 0,
                                instances=args.instances, perturb=args.perturb)
    width = max(len(f"{r.loss}/{r.block}") for r in rows)
    failed = False
    for r in rows:
        status = "ok" if r.passed else "FAIL"
        print(f"{r.loss + '/' + r.block:<{width}}  max_rel_err={r.max_rel_err:.3e}  {status}")
        failed = failed or not r.passed
    if args.out:
        out = _out_dir(args)
        write_json(out / "gradcheck.json",
                   [{"loss": r.loss, "block": r.block, "max_rel_err": r.max_rel_err,
                     "passed": r.passed} for r in rows])
    if failed:
        bad = [f"{r.loss}/{r.block}" for r in rows if not r.passed]
        print(f"gradient check FAILED (tolerance {TOLERANCE}): {', '.join(bad)}",
              file=sys.stderr)
        return 1
    return 0


def cmd_detect_eval(args) -> int:
    input_path = args.input
    taus = tuple(float(t) for t in args.tau_sweep.split(",")) if args.tau_sweep else ()
    if args.config:
        cfg = parse_experiment_config(args.config)
        input_path = input_path or cfg.detect_input
        taus = taus or cfg.detect_taus
    if not input_path:
        raise ConfigError("no detection input: pass --input or set [detect] input")
    if not Path(input_path).exists():
        raise ConfigError(f"detection file not found: {input_path}")
    out = _out_dir(args)
    sets = detection.load_detections_jsonl(input_path)
    if sum(len(ds.ground_truth) for ds in sets) == 0:
        raise DataError("no ground-truth boxes in input")
    result = detection.map_suite(sets)
    if taus:
        confs = np.array([c for ds in sets for _, c in ds.predictions])
        result["tau_sweep"] = [
            {"tau": t, "kept": int(detection.cascade_gate(confs, t).sum()),
             "total": int(confs.shape[0])}
            for t in taus
        ]
    write_json(out / "map.json", result)
    recall, precision = detection.precision_recall_points(sets, 0.5)
    report.pr_curve_figure(recall, precision, "IoU 0.50", out / "pr_curve.svg")
    return 0


def cmd_pca(args) -> int:
    model_path, data_path = args.model, args.data
    if args.config:
        cfg = parse_experiment_config(args.config)
        model_path = model_path or cfg.pca_model
        data_path = data_path or cfg.pca_data
    if not model_path or not data_path:
        raise ConfigError("pca needs --model and --data (or [pca] config keys)")
    for p in (model_path, data_path):
        if not Path(p).exists():
            raise ConfigError(f"file not found: {p}")
    out = _out_dir(args)
    params = load_model(model_path)
    data = load_csv(data_path)
    embedded, _ = forward(params, data.features)
    proj = analysis.pca_2d(embedded)
    analysis.write_projection_csv(proj, data.labels, out / "projection.csv")
    stats = analysis.cluster_stats(embedded, data.labels, params.anchors)
    write_json(out / "cluster_stats.json", stats.to_json_dict())
    report.scatter_figure(proj.projected, data.labels, out / "projection.svg")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nuce",
        description="Uncertainty-weighted contractive-embedding loss lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI experiment config")
        p.add_argument("--seed", type=int, help="override the config seed list")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("train", help="train seeds x folds, write metrics")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ablation", help="CE vs uncertainty weighting vs full objective")
    common(p)
    p.set_defaults(func=cmd_ablation)

    p = sub.add_parser("sweep", help="hyperparameter grid sweep")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    common(p)
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--perturb", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("detect-eval", help="single-class mAP over a JSONL file")
    common(p)
    p.add_argument("--input", help="detections JSONL")
    p.add_argument("--tau-sweep", help="comma list of gate thresholds")
    p.set_defaults(func=cmd_detect_eval)

    p = sub.add_parser("pca", help="project embeddings to 2-D, cluster stats")
    common(p)
    p.add_argument("--model", help="trained model JSON")
    p.add_argument("--data", help="dataset CSV")
    p.set_defaults(func=cmd_pca)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())
