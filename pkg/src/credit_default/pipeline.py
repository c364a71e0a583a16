"""End-to-end run: encode, select, denoise, resample, split, scale, fit, evaluate, report."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from pathlib import Path

from . import classifiers
from .boruta import BorutaConfig, BorutaResult, map_indicators_to_variables, run_boruta
from .config import PipelineConfig
from .dbscan import DbscanConfig, dbscan, remove_outliers
from .errors import ConfigError, EmptySelectionError, StageError
from .eval import (GBM_WINNERS, KNN_GRID, evaluate_scores, gbm_grid, grid_search, pr_curve,
                   roc_curve, write_curve)
from .reporting import report_json
from .resample import ResampleConfig, resample
from .seeding import stream_seed
from .tabular import (CATEGORICAL, Dataset, ingest_csv, one_hot_encode, stratified_split,
                      write_csv, zscore_apply, zscore_fit)

log = logging.getLogger(__name__)


def default_params(model: str, method: str) -> dict:
    if model == "gbm":
        return dict(GBM_WINNERS.get(method, GBM_WINNERS["smote_tomek"]))
    if model == "knn":
        return {"k": 5}
    return {}


def default_grid(model: str, method: str) -> dict | None:
    if model == "gbm":
        return gbm_grid(method)
    if model == "knn":
        return KNN_GRID
    return None


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class _Ledger:
    """Stage bookkeeping: row counts and wall-clock per stage."""

    def __init__(self):
        self.rows = []
        self.timings = {}

    def record(self, stage, ds_in: Dataset, ds_out: Dataset, seconds: float, **extra):
        counts = ds_out.class_counts()
        self.rows.append({"stage": stage, "rows_in": ds_in.n_rows, "rows_out": ds_out.n_rows,
                          "class0_out": counts[0], "class1_out": counts[1],
                          "columns_out": ds_out.n_cols, **extra})
        self.timings[stage] = seconds

    def write(self, path):
        fields = ["stage", "rows_in", "rows_out", "class0_out", "class1_out", "columns_out", "holdout_rows"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n", restval="")
            writer.writeheader()
            writer.writerows(self.rows)


# bump when the selection procedure changes so stale cache files are ignored
BORUTA_CACHE_VERSION = 2


def _boruta_cached(ds: Dataset, cfg: BorutaConfig, cache_dir, input_hash: str):
    """``(BorutaResult, seconds)``; seconds is the original compute time even on a cache hit."""
    if cache_dir is None:
        start = time.perf_counter()
        return run_boruta(ds, cfg), time.perf_counter() - start
    key = hashlib.sha256(json.dumps(
        [BORUTA_CACHE_VERSION, input_hash, list(ds.columns), ds.n_rows, int(ds.y.sum()), cfg.max_iter,
         cfg.alpha, cfg.max_depth, cfg.n_trees, cfg.first_test_iter, cfg.seed,
         cfg.shadow_scope]).encode()).hexdigest()[:24]
    path = Path(cache_dir) / f"boruta_{key}.json"
    if path.is_file():
        d = json.loads(path.read_text(encoding="utf-8"))
        result = BorutaResult(d["features"], d["status"], d["hit_counts"], d["iterations_run"],
                              decided_at=d["decided_at"], resolved_by_median=d["resolved_by_median"])
        return result, d["seconds"]
    start = time.perf_counter()
    result = run_boruta(ds, cfg)
    seconds = time.perf_counter() - start
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({**result.to_dict(), "seconds": seconds}, indent=2, sort_keys=True),
                    encoding="utf-8")
    return result, seconds


class _Run:
    def __init__(self, config: PipelineConfig):
        self.cfg = config
        self.out = Path(config.out)
        self.ledger = _Ledger()
        self.report = {"seed": config.seed, "config": config.to_dict()}

    def stage(self, name, fn, *args):
        start = time.perf_counter()
        try:
            result = fn(*args)
        except ConfigError:
            raise
        except Exception as exc:
            self.report["failed_stage"] = name
            self.report["error"] = f"{type(exc).__name__}: {exc}"
            self.flush()
            raise StageError(name, exc) from exc
        log.info("stage %s done in %.1fs", name, time.perf_counter() - start)
        return result, time.perf_counter() - start

    def flush(self):
        self.report["stages"] = self.ledger.rows
        self.report["timings"] = self.ledger.timings
        self.ledger.write(self.out / "stage_counts.csv")
        (self.out / "report.json").write_text(report_json(self.report), encoding="utf-8")

    def seed(self, *tags) -> int:
        return stream_seed(self.cfg.seed, *tags)


def _select(run: _Run, ds: Dataset, input_hash: str) -> Dataset:
    cfg = run.cfg
    bcfg = BorutaConfig(max_iter=cfg.boruta_max_iter, alpha=cfg.boruta_alpha, n_trees=cfg.boruta_trees,
                        shadow_scope=cfg.boruta_shadow_scope, n_jobs=cfg.threads, seed=run.seed("boruta"))
    result, seconds = _boruta_cached(ds, bcfg, cfg.boruta_cache, input_hash)
    (run.out / "boruta.json").write_text(result.to_json(), encoding="utf-8")
    run.report["boruta"] = {
        "status": result.status,
        "hit_counts": result.hit_counts,
        "iterations_run": result.iterations_run,
        "confirmed": result.confirmed,
        "variable_status": map_indicators_to_variables(result, ds.encoding_map()),
        "seconds": seconds,
    }
    if not result.confirmed:
        raise EmptySelectionError("Boruta confirmed no features")
    return ds.select_columns(result.confirmed)


def _denoise(run: _Run, ds: Dataset) -> Dataset:
    assignment = dbscan(ds.X, DbscanConfig(run.cfg.dbscan_eps, run.cfg.dbscan_min_pts))
    assignment.to_csv(run.out / "dbscan_labels.csv", ds.row_ids)
    kept, _ = remove_outliers(ds, assignment)
    run.report["dbscan"] = {"n_clusters": assignment.n_clusters, "n_noise": assignment.n_noise,
                            "noise_fraction": assignment.n_noise / ds.n_rows}
    if kept.n_rows == 0:
        raise EmptySelectionError("DBSCAN removed every row")
    return kept


def _resample(run: _Run, ds: Dataset) -> Dataset:
    rcfg = ResampleConfig(run.cfg.resample, run.cfg.k_neighbors, run.cfg.beta, run.seed("resample"))
    out = resample(ds, rcfg)
    write_csv(out, run.out / "resampled.csv", synthetic_flag=True)
    run.report["resample"] = {"method": rcfg.method, "synthetic_rows": int(out.synthetic.sum()),
                              "removed_rows": int(ds.n_rows + out.synthetic.sum() - out.n_rows)}
    return out


def _fit_models(run: _Run, train: Dataset, test: Dataset) -> dict:
    cfg = run.cfg
    models_dir = run.out / "models"
    models_dir.mkdir(exist_ok=True)
    results, metric_rows = {}, []
    for name in cfg.models:
        params = {**default_params(name, cfg.resample), **cfg.model_params.get(name, {})}
        grid_info = None
        if cfg.grid_search:
            grid = cfg.grids.get(name) or default_grid(name, cfg.resample)
            if grid:
                gs = grid_search(name, grid, train, folds=cfg.folds, seed=run.seed("grid", name),
                                 threads=cfg.threads)
                (run.out / f"grid_{name}.json").write_text(report_json(gs.to_dict()), encoding="utf-8")
                if gs.best_params is None:
                    raise ConfigError(f"every grid combination failed for {name}")
                params = {**params, **gs.best_params}
                grid_info = {"best_params": gs.best_params, "best_score": gs.best_score,
                             "n_fits": gs.n_fits, "failed": gs.failed, "seconds": gs.seconds}
        start = time.perf_counter()
        model = classifiers.fit_model(name, train.X, train.y, seed=run.seed("model", name), **params)
        seconds = time.perf_counter() - start
        classifiers.save_model(model, models_dir / f"{name}.json")
        entry = {"params": params, "grid": grid_info, "train_seconds": seconds}
        for phase, ds in (("train", train), ("test", test)):
            scores = model.score(ds.X)
            m = evaluate_scores(ds.y, scores, train_seconds=seconds)
            entry[phase] = m.to_dict()
            metric_rows.append({"model": name, "phase": phase, **{k: v for k, v in m.to_dict().items()
                                                                 if k != "counts"}, **m.to_dict()["counts"]})
            if phase == "test":
                thr, fpr, tpr = roc_curve(ds.y, scores)
                write_curve(run.out / f"roc_points_{name}.csv", thr, fpr, tpr, "fpr", "tpr")
                thr, rec, prec = pr_curve(ds.y, scores)
                write_curve(run.out / f"pr_points_{name}.csv", thr, rec, prec, "recall", "precision")
        results[name] = entry
        log.info("%s: test f1 %.4f roc_auc %.4f (%.1fs)", name, entry["test"]["f1"],
                 entry["test"]["roc_auc"], seconds)
    fields = ["model", "phase", "recall", "specificity", "precision", "f1", "g_mean", "roc_auc",
              "pr_auc", "tp", "fp", "tn", "fn", "train_seconds"]
    with open(run.out / "metrics.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in metric_rows:
            writer.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})
    return results


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute every stage and persist artifacts under ``config.out``; returns the report.

    Default order resamples before the train/test split. With
    ``leakage_safe`` the split comes right after encoding; selection,
    scaling, denoising and resampling then see the training part only, and
    the test part is only encoded, column-selected and scaled.
    """
    config.validate()
    if not config.input:
        raise ConfigError("no input file given")
    run = _Run(config)
    run.out.mkdir(parents=True, exist_ok=True)
    led = run.ledger
    input_hash = file_sha256(config.input)
    run.report["input"] = {"path": str(config.input), "sha256": input_hash}

    raw, t = run.stage("ingest", ingest_csv, config.input)
    led.record("ingest", raw, raw, t)
    encoded, t = run.stage("one_hot", one_hot_encode, raw, CATEGORICAL)
    led.record("one_hot", raw, encoded, t)

    test = None
    current = encoded
    if config.leakage_safe:
        split, t = run.stage("split", stratified_split, current, config.test_fraction, run.seed("split"))
        led.record("split", current, split.train, t, holdout_rows=split.test.n_rows)
        current, test = split.train, split.test

    selected, t = run.stage("boruta", _select, run, current, input_hash)
    led.record("boruta", current, selected, t)
    write_csv(selected, run.out / "selected.csv")

    pre, t = run.stage("zscore", zscore_fit, selected)
    scaled = zscore_apply(selected, pre)
    led.record("zscore", selected, scaled, t)
    run.report["scaler_pre"] = pre.to_dict()

    denoised, t = run.stage("dbscan", _denoise, run, scaled)
    led.record("dbscan", scaled, denoised, t)
    write_csv(denoised, run.out / "denoised.csv")

    balanced, t = run.stage("resample", _resample, run, denoised)
    led.record("resample", denoised, balanced, t)

    if config.leakage_safe:
        train = balanced
        test = zscore_apply(test.select_columns(selected.columns), pre)
    else:
        split, t = run.stage("split", stratified_split, balanced, config.test_fraction, run.seed("split"))
        led.record("split", balanced, split.train, t, holdout_rows=split.test.n_rows)
        train, test = split.train, split.test

    post, t = run.stage("rescale", zscore_fit, train)
    train, test = zscore_apply(train, post), zscore_apply(test, post)
    led.record("rescale", train, train, t, holdout_rows=test.n_rows)
    run.report["scaler_post"] = post.to_dict()
    write_csv(train, run.out / "train.csv", synthetic_flag=True)
    write_csv(test, run.out / "test.csv", synthetic_flag=True)
    run.report["test_counts"] = test.class_counts()

    results, t = run.stage("models", _fit_models, run, train, test)
    run.report["models"] = results
    led.timings["models"] = t
    run.flush()
    return json.loads(report_json(run.report))
