"""Command-line entry point: ``credit-default <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 stage failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import METHODS, MODEL_ORDER, PipelineConfig, apply_settings, parse_value, read_config_file
from .errors import ConfigError, DataError, EmptySelectionError, StageError
from .reporting import report_json
from .seeding import stream_seed
from .tabular import (CATEGORICAL, Dataset, ingest_csv, one_hot_encode, read_csv, summarize,
                      write_csv, zscore_apply, zscore_fit)

# numeric modules are imported inside the commands so that `describe` starts fast

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_STAGE = 0, 2, 3, 4
GRID_NAMES = ("gbm", "gbm_smote", "knn")


def load_dataset(path) -> Dataset:
    """UCI-layout files (first column ``ID``) are ingested; stage artifacts are read back as written."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"input file not found: {path}")
    with path.open(encoding="utf-8-sig") as fh:
        first = fh.readline().split(",", 1)[0].strip()
    return ingest_csv(path) if first == "ID" else read_csv(path)


def _encoded(ds: Dataset) -> Dataset:
    todo = [c for c in CATEGORICAL if c in ds.columns]
    return one_hot_encode(ds, todo)


def _outdir(args) -> Path:
    out = Path(args.out or "runs/latest")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _settings(args) -> dict:
    settings = read_config_file(args.config) if args.config else {}
    for item in getattr(args, "param", None) or []:
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        settings[key.strip()] = parse_value(value)
    return settings


def _config(args) -> PipelineConfig:
    cfg = apply_settings(PipelineConfig(), _settings(args))
    cfg.seed = args.seed if args.seed is not None else cfg.seed
    cfg.threads = args.threads or cfg.threads
    cfg.leakage_safe = cfg.leakage_safe or args.leakage_safe
    cfg.out = args.out or cfg.out
    return cfg


def cmd_describe(args) -> dict:
    ds = load_dataset(args.input)
    summary = summarize(ds)
    if args.out:
        (_outdir(args) / "describe.json").write_text(report_json(summary), encoding="utf-8")
    return summary


def cmd_select(args) -> dict:
    from .boruta import BorutaConfig, map_indicators_to_variables, run_boruta

    cfg = _config(args)
    ds = _encoded(load_dataset(args.input))
    bcfg = BorutaConfig(max_iter=cfg.boruta_max_iter, alpha=cfg.boruta_alpha, n_trees=cfg.boruta_trees,
                        shadow_scope=cfg.boruta_shadow_scope, n_jobs=cfg.threads, seed=stream_seed(cfg.seed, "boruta"))
    result = run_boruta(ds, bcfg)
    out = _outdir(args)
    (out / "boruta.json").write_text(result.to_json(), encoding="utf-8")
    if not result.confirmed:
        raise EmptySelectionError("Boruta confirmed no features")
    write_csv(ds.select_columns(result.confirmed), out / "selected.csv")
    return {"confirmed": result.confirmed, "iterations_run": result.iterations_run,
            "variable_status": map_indicators_to_variables(result, ds.encoding_map())}


def cmd_denoise(args) -> dict:
    from .dbscan import DbscanConfig, dbscan, remove_outliers

    cfg = _config(args)
    ds = load_dataset(args.input)
    out = _outdir(args)
    if not args.prescaled:
        params = zscore_fit(ds)
        ds = zscore_apply(ds, params)
        (out / "scaler.json").write_text(report_json(params.to_dict()), encoding="utf-8")
    assignment = dbscan(ds.X, DbscanConfig(cfg.dbscan_eps, cfg.dbscan_min_pts))
    assignment.to_csv(out / "dbscan_labels.csv", ds.row_ids)
    kept, counts = remove_outliers(ds, assignment)
    write_csv(kept, out / "denoised.csv")
    return {"n_clusters": assignment.n_clusters, "n_noise": assignment.n_noise, "kept": counts}


def cmd_resample(args) -> dict:
    from .resample import ResampleConfig, resample

    cfg = _config(args)
    method = args.method or cfg.resample
    ds = load_dataset(args.input)
    rcfg = ResampleConfig(method, cfg.k_neighbors, cfg.beta, stream_seed(cfg.seed, "resample"))
    result = resample(ds, rcfg)
    write_csv(result, _outdir(args) / "resampled.csv", synthetic_flag=True)
    return {"method": method, "class_counts": result.class_counts(), "rows": result.n_rows}


def cmd_train(args) -> dict:
    from . import classifiers
    from .pipeline import default_params

    cfg = _config(args)
    ds = load_dataset(args.input)
    params = {**default_params(args.model, cfg.resample), **cfg.model_params.get(args.model, {})}
    model = classifiers.fit_model(args.model, ds.X, ds.y, seed=stream_seed(cfg.seed, "model", args.model), **params)
    path = classifiers.save_model(model, _outdir(args) / f"{args.model}.json")
    return {"model": args.model, "params": params, "path": str(path)}


def cmd_evaluate(args) -> dict:
    from . import classifiers
    from .eval import evaluate_scores, pr_curve, roc_curve, write_curve

    model = classifiers.load_model(args.model_file)
    ds = load_dataset(args.input)
    scores = model.score(ds.X)
    report = evaluate_scores(ds.y, scores).to_dict()
    out = _outdir(args)
    name = Path(args.model_file).stem
    (out / f"metrics_{name}.json").write_text(report_json(report), encoding="utf-8")
    if 0 < ds.y.sum() < ds.n_rows:
        write_curve(out / f"roc_points_{name}.csv", *roc_curve(ds.y, scores), "fpr", "tpr")
        write_curve(out / f"pr_points_{name}.csv", *pr_curve(ds.y, scores), "recall", "precision")
    return report


def cmd_gridsearch(args) -> dict:
    from .eval import GBM_GRID, GBM_GRID_SMOTE, KNN_GRID, grid_search

    cfg = _config(args)
    ds = load_dataset(args.input)
    grids = {"gbm": GBM_GRID, "gbm_smote": GBM_GRID_SMOTE, "knn": KNN_GRID}
    grid = cfg.grids.get(args.model) or grids.get(args.grid or args.model)
    if grid is None:
        raise ConfigError(f"no grid for {args.model!r}; give grid.{args.model}.<param> keys in --config")
    result = grid_search(args.model, grid, ds, folds=cfg.folds, seed=stream_seed(cfg.seed, "grid", args.model),
                         threads=cfg.threads)
    (_outdir(args) / f"grid_{args.model}.json").write_text(report_json(result.to_dict()), encoding="utf-8")
    return {"best_params": result.best_params, "best_score": result.best_score, "n_fits": result.n_fits,
            "failed": result.failed}


def cmd_pipeline(args) -> dict:
    from .pipeline import run_pipeline

    cfg = _config(args)
    cfg.input = args.input
    if args.resample:
        cfg.resample = args.resample
    if args.models:
        cfg.models = tuple(args.models.split(","))
    if args.grid_search:
        cfg.grid_search = True
    report = run_pipeline(cfg)
    return {name: {"test": {k: m["test"][k] for k in ("f1", "g_mean", "roc_auc", "pr_auc")}}
            for name, m in report["models"].items()}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="run seed (unsigned 64-bit)")
    common.add_argument("--config", help="plain-text key = value file")
    common.add_argument("--out", help="output directory (default runs/latest)")
    common.add_argument("--leakage-safe", action="store_true", help="split before resampling")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--param", action="append", metavar="KEY=VALUE", help="extra config setting")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="credit-default", description="Imbalanced credit-default pipeline")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", parents=[common], help="class balance and column summary")
    p.add_argument("input")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("select", parents=[common], help="Boruta feature selection")
    p.add_argument("input")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("denoise", parents=[common], help="DBSCAN outlier removal")
    p.add_argument("input")
    p.add_argument("--prescaled", action="store_true", help="skip z-scoring the input")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("resample", parents=[common], help="minority oversampling")
    p.add_argument("input")
    p.add_argument("--method", choices=METHODS)
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("train", parents=[common], help="fit one classifier")
    p.add_argument("input")
    p.add_argument("--model", required=True, choices=MODEL_ORDER)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="score a saved model on a dataset")
    p.add_argument("model_file")
    p.add_argument("input")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gridsearch", parents=[common], help="grid search with stratified k-fold CV")
    p.add_argument("input")
    p.add_argument("--model", required=True, choices=MODEL_ORDER)
    p.add_argument("--grid", choices=GRID_NAMES, help="built-in grid")
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("pipeline", parents=[common], help="run every stage end to end")
    p.add_argument("input")
    p.add_argument("--resample", choices=METHODS)
    p.add_argument("--models", help="comma-separated subset of " + ",".join(MODEL_ORDER))
    p.add_argument("--grid-search", action="store_true")
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        result = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, ConfigError):
            return EXIT_CONFIG
        return EXIT_DATA if isinstance(exc.cause, DataError) else EXIT_STAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(report_json(result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
