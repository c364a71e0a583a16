"""Imbalance-aware metrics, ranking AUCs, stratified k-fold CV and grid search."""

from __future__ import annotations

import csv
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .classifiers import fit_model, predict_labels
from .errors import ConfigError, DataError
from .seeding import stream
from .tabular import Dataset


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _binary(a, name):
    a = np.asarray(a)
    if not np.isin(a, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return a.astype(np.int64)


def confusion(labels, predictions) -> ConfusionCounts:
    y = _binary(labels, "labels")
    p = _binary(predictions, "predictions")
    if y.shape != p.shape:
        raise ValueError(f"{len(y)} labels but {len(p)} predictions")
    return ConfusionCounts(
        tp=int(np.sum((y == 1) & (p == 1))),
        fp=int(np.sum((y == 0) & (p == 1))),
        tn=int(np.sum((y == 0) & (p == 0))),
        fn=int(np.sum((y == 1) & (p == 0))),
    )


def _ratio(num, den):
    return num / den if den else 0.0


def classification_metrics(counts: ConfusionCounts) -> dict:
    """Recall, specificity, precision, F1 and G-mean; 0 wherever a denominator vanishes."""
    if counts.total == 0:
        raise ValueError("no rows to evaluate")
    recall = _ratio(counts.tp, counts.tp + counts.fn)
    specificity = _ratio(counts.tn, counts.tn + counts.fp)
    precision = _ratio(counts.tp, counts.tp + counts.fp)
    f1 = _ratio(2 * precision * recall, precision + recall)
    return {
        "recall": recall,
        "specificity": specificity,
        "precision": precision,
        "f1": f1,
        "g_mean": math.sqrt(recall * specificity),
    }


def _check_scores(labels, scores):
    y = _binary(labels, "labels")
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != y.shape:
        raise ValueError(f"{len(y)} labels but {len(s)} scores")
    if np.isnan(s).any():
        raise ValueError("scores contain NaN")
    return y, s


def roc_auc(labels, scores) -> float:
    """P(score_pos > score_neg) + P(tie) / 2, via average ranks."""
    y, s = _check_scores(labels, scores)
    n1 = int(y.sum())
    n0 = len(y) - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("roc_auc needs both classes")
    ranks = rankdata(s)
    return float((ranks[y == 1].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def _threshold_blocks(y, s):
    """Cumulative (tp, fp) after each block of tied scores, scanning scores high to low."""
    order = np.argsort(-s, kind="stable")
    s_sorted, y_sorted = s[order], y[order]
    ends = np.flatnonzero(np.diff(s_sorted) != 0)
    ends = np.append(ends, len(s) - 1)
    tp = np.cumsum(y_sorted)[ends]
    fp = (ends + 1) - tp
    return s_sorted[ends], tp, fp


def roc_curve(labels, scores):
    """``(thresholds, fpr, tpr)`` starting at the (0, 0) corner with threshold +inf."""
    y, s = _check_scores(labels, scores)
    thr, tp, fp = _threshold_blocks(y, s)
    P, N = tp[-1], fp[-1]
    if P == 0 or N == 0:
        raise ValueError("roc_curve needs both classes")
    return (np.concatenate([[np.inf], thr]), np.concatenate([[0.0], fp / N]),
            np.concatenate([[0.0], tp / P]))


def pr_curve(labels, scores):
    """``(thresholds, recall, precision)`` at every distinct score, high to low."""
    y, s = _check_scores(labels, scores)
    thr, tp, fp = _threshold_blocks(y, s)
    if tp[-1] == 0:
        raise ValueError("pr_curve needs at least one positive")
    return thr, tp / tp[-1], tp / (tp + fp)


def pr_auc(labels, scores) -> float:
    """Average precision: sum of recall increments times precision, ties as one block."""
    _, recall, precision = pr_curve(labels, scores)
    return float(np.sum(np.diff(recall, prepend=0.0) * precision))


def write_curve(path, thresholds, x, y, x_name: str, y_name: str) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["threshold", x_name, y_name])
        for t, a, b in zip(thresholds, x, y):
            writer.writerow([repr(float(t)), repr(float(a)), repr(float(b))])
    return path


@dataclass
class MetricsReport:
    recall: float
    specificity: float
    precision: float
    f1: float
    g_mean: float
    roc_auc: float
    pr_auc: float
    counts: ConfusionCounts
    train_seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        d = dict(d)
        d["counts"] = ConfusionCounts(**d["counts"])
        return cls(**d)


def evaluate_scores(labels, scores, threshold: float = 0.5, train_seconds: float = 0.0) -> MetricsReport:
    """Every metric at once. AUCs are NaN when the labels hold a single class."""
    y, s = _check_scores(labels, scores)
    counts = confusion(y, predict_labels(s, threshold))
    both = 0 < y.sum() < len(y)
    return MetricsReport(
        **classification_metrics(counts),
        roc_auc=roc_auc(y, s) if both else float("nan"),
        pr_auc=pr_auc(y, s) if y.sum() > 0 else float("nan"),
        counts=counts,
        train_seconds=train_seconds,
    )


def _xy(data, y=None):
    if isinstance(data, Dataset):
        return data.X, data.y
    return np.asarray(data, dtype=np.float64), np.asarray(y)


def stratified_folds(y, folds: int = 5, seed: int = 0) -> np.ndarray:
    """Fold id per row: each class is shuffled, then dealt to folds round-robin."""
    y = np.asarray(y)
    if folds < 2:
        raise ValueError("need at least 2 folds")
    out = np.empty(len(y), dtype=np.int64)
    for c in (0, 1):
        rows = np.flatnonzero(y == c)
        if len(rows) < folds:
            raise DataError(f"class {c} has {len(rows)} rows, fewer than {folds} folds")
        rows = stream(seed, "cv-folds", c).permutation(rows)
        out[rows] = np.arange(len(rows)) % folds
    return out


SCORERS = {
    "f1": lambda y, s: classification_metrics(confusion(y, predict_labels(s)))["f1"],
    "g_mean": lambda y, s: classification_metrics(confusion(y, predict_labels(s)))["g_mean"],
    "roc_auc": roc_auc,
    "pr_auc": pr_auc,
}


@dataclass
class CvResult:
    mean: float
    scores: list


def stratified_kfold_cv(model: str, params: dict, data, y=None, folds: int = 5,
                        scoring: str = "f1", seed: int = 0) -> CvResult:
    """Fit ``model`` with ``params`` on each training fold and score the held-out fold.

    ``data`` is a Dataset or a feature matrix (then ``y`` is required).
    """
    X, y = _xy(data, y)
    fold = stratified_folds(y, folds, seed)
    scorer = SCORERS[scoring]
    scores = []
    for k in range(folds):
        train, test = fold != k, fold == k
        fitted = fit_model(model, X[train], y[train], seed=seed, **params)
        scores.append(float(scorer(y[test], fitted.score(X[test]))))
    return CvResult(float(np.mean(scores)), scores)


@dataclass
class GridSearchResult:
    model: str
    best_params: dict | None
    best_score: float
    results: list            # one dict per combination, enumeration order
    n_fits: int
    failed: list = field(default_factory=list)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def expand_grid(grid: dict) -> list:
    """Cartesian product in key order, last key varying fastest."""
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ConfigError("grid must be non-empty with at least one value per parameter")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def grid_search(model: str, grid: dict, data, y=None, folds: int = 5, scoring: str = "f1",
                seed: int = 0, threads: int = 1) -> GridSearchResult:
    """Exhaustive search over ``grid``; the first combination reaching the best mean score wins.

    A combination whose fit raises is recorded with its error and left out of
    the argmax.
    """
    X, y = _xy(data, y)
    combos = expand_grid(grid)
    start = time.perf_counter()

    def run(params):
        try:
            cv = stratified_kfold_cv(model, params, X, y, folds, scoring, seed)
            return {"params": params, "mean": cv.mean, "scores": cv.scores, "error": None}
        except (ValueError, TypeError) as exc:
            return {"params": params, "mean": None, "scores": [], "error": f"{type(exc).__name__}: {exc}"}

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, combos))
    else:
        results = [run(p) for p in combos]
    best, best_score = None, -math.inf
    for r in results:
        if r["error"] is None and r["mean"] > best_score:
            best, best_score = r["params"], r["mean"]
    failed = [r["params"] for r in results if r["error"] is not None]
    return GridSearchResult(model, best, best_score, results, len(combos) * folds, failed,
                            time.perf_counter() - start)


GBM_GRID = {
    "learning_rate": [0.01, 0.05, 0.1],
    "max_depth": [3, 5, 7],
    "n_estimators": [100, 150],
    "subsample": [0.5, 0.75, 1.0],
    "max_features": ["sqrt", "all"],
}
# the SMOTE run used a grid without subsample 0.75
GBM_GRID_SMOTE = {**GBM_GRID, "subsample": [0.5, 1.0]}
KNN_GRID = {"k": [3, 5, 7, 9, 11]}

# winners reported for the GBM runs, keyed by resampling method
GBM_WINNERS = {
    "smote": {"learning_rate": 0.1, "max_depth": 7, "n_estimators": 100, "subsample": 1.0,
              "max_features": "sqrt"},
    "smote_tomek": {"learning_rate": 0.1, "max_depth": 7, "n_estimators": 150, "subsample": 0.5,
                    "max_features": "all"},
    "adasyn": {"learning_rate": 0.1, "max_depth": 7, "n_estimators": 150, "subsample": 1.0,
               "max_features": "all"},
}


def gbm_grid(method: str) -> dict:
    return GBM_GRID_SMOTE if method == "smote" else GBM_GRID


def grid_fit_count(grid: dict, folds: int = 5) -> int:
    return len(expand_grid(grid)) * folds
