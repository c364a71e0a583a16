"""All-relevant feature selection with permuted shadow features (Boruta)."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .config import SHADOW_SCOPES
from .errors import DataError, EmptySelectionError
from .seeding import stream
from .tabular import Dataset
from .trees import fit_random_forest

log = logging.getLogger(__name__)

CONFIRMED = "confirmed"
REJECTED = "rejected"
TENTATIVE = "tentative"


@dataclass(frozen=True)
class BorutaConfig:
    max_iter: int = 100
    alpha: float = 0.05
    max_depth: int = 5
    class_weight: str = "balanced"
    n_trees: int | None = None  # None: auto rule
    first_test_iter: int = 5
    seed: int = 0
    # "undecided": shadows for tentative features only, every real feature stays in the design.
    # "unrejected": shadows for confirmed and tentative features, rejected ones leave the design.
    shadow_scope: str = "undecided"
    n_jobs: int = 1

    def __post_init__(self):
        if self.shadow_scope not in SHADOW_SCOPES:
            raise ValueError(f"shadow_scope must be one of {SHADOW_SCOPES}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.max_iter < 10:
            raise ValueError("max_iter must be at least 10")


def auto_tree_count(n_columns: int) -> int:
    """Forest size for a design matrix of ``n_columns`` (real plus shadow) columns."""
    return max(64, int(round(np.sqrt(n_columns) * 10)))


@dataclass
class BorutaResult:
    features: list
    status: dict
    hit_counts: dict
    iterations_run: int
    importance_history: list = field(default_factory=list)
    shadow_max_history: list = field(default_factory=list)
    decided_at: dict = field(default_factory=dict)
    resolved_by_median: list = field(default_factory=list)

    @property
    def confirmed(self) -> list:
        return [f for f in self.features if self.status[f] == CONFIRMED]

    @property
    def rejected(self) -> list:
        return [f for f in self.features if self.status[f] == REJECTED]

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "status": dict(self.status),
            "hit_counts": {k: int(v) for k, v in self.hit_counts.items()},
            "iterations_run": self.iterations_run,
            "decided_at": dict(self.decided_at),
            "resolved_by_median": list(self.resolved_by_median),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _binomial_decisions(hits, n_iter, alpha, n_tests):
    """Two-sided binomial tests against hit probability 1/2, Bonferroni corrected.

    A significant result confirms when hits exceed half the rounds and rejects
    otherwise.
    """
    upper = stats.binom.sf(hits - 1, n_iter, 0.5)
    lower = stats.binom.cdf(hits, n_iter, 0.5)
    p = np.minimum(1.0, 2 * np.minimum(upper, lower))
    significant = p * n_tests < alpha
    above = 2 * hits > n_iter
    return significant & above, significant & ~above


def run_boruta(ds: Dataset, config: BorutaConfig = BorutaConfig()) -> BorutaResult:
    """Run the Boruta iterations on ``ds``.

    Each round appends one independently permuted copy of every undecided
    feature, fits a balanced, depth-limited random forest, and scores a hit
    for each real feature whose importance strictly exceeds the best shadow.
    From round ``first_test_iter`` on, undecided features are confirmed or
    rejected by Bonferroni-corrected binomial tests. With the default
    ``shadow_scope`` decided features stay in the design matrix but stop
    producing shadows; ``"unrejected"`` instead keeps shadowing confirmed
    features and drops rejected ones from the design. Features still tentative at
    the end are confirmed iff their median importance beats the median best
    shadow importance.
    """
    if ds.n_cols < 2:
        raise DataError("Boruta needs at least two features")
    counts = ds.class_counts()
    if counts[0] == 0 or counts[1] == 0:
        raise DataError("Boruta needs both classes present")
    d = ds.n_cols
    X = ds.X
    y = ds.y.astype(np.int64)
    status = np.full(d, TENTATIVE, dtype=object)
    hits = np.zeros(d, dtype=np.int64)
    imp_history, shadow_history = [], []
    decided_at = {}
    it = 0
    while it < config.max_iter:
        undecided = np.flatnonzero(status == TENTATIVE)
        if len(undecided) == 0:
            break
        it += 1
        rng = stream(config.seed, "boruta-shadow", it)
        if config.shadow_scope == "undecided":
            real_cols = np.arange(d)
            shadow_src = undecided
        elif config.shadow_scope == "unrejected":
            real_cols = np.flatnonzero(status != REJECTED)
            shadow_src = real_cols
        else:
            real_cols = shadow_src = np.arange(d)
        shadows = np.column_stack([rng.permutation(X[:, j]) for j in shadow_src])
        design = np.hstack([X[:, real_cols], shadows])
        # split ties go to the lower column index, so shuffle to keep that neutral
        order = rng.permutation(design.shape[1])
        n_trees = config.n_trees or auto_tree_count(design.shape[1])
        forest = fit_random_forest(
            design[:, order], y, n_trees=n_trees, max_depth=config.max_depth, max_features="sqrt",
            class_weight=config.class_weight, seed=stream(config.seed, "boruta-forest", it).integers(2**63),
            n_jobs=config.n_jobs,
        )
        imp = np.empty(design.shape[1])
        imp[order] = forest.importances
        real = np.zeros(d)
        real[real_cols] = imp[:len(real_cols)]
        shadow_max = float(imp[len(real_cols):].max())
        hit = real > shadow_max
        if config.shadow_scope == "unrejected":
            hit[status == REJECTED] = False
        hits += hit
        imp_history.append(real.tolist())
        shadow_history.append(shadow_max)
        if it >= config.first_test_iter:
            accept, reject = _binomial_decisions(hits[undecided], it, config.alpha, len(undecided))
            for j, a, r in zip(undecided, accept, reject):
                if a:
                    status[j] = CONFIRMED
                    decided_at[ds.columns[j]] = it
                elif r:
                    status[j] = REJECTED
                    decided_at[ds.columns[j]] = it
        log.info("boruta iter %d: %d confirmed, %d rejected, %d tentative", it,
                 np.sum(status == CONFIRMED), np.sum(status == REJECTED), np.sum(status == TENTATIVE))
    resolved = []
    if imp_history:
        med_imp = np.median(np.array(imp_history), axis=0)
        med_shadow = float(np.median(shadow_history))
        for j in np.flatnonzero(status == TENTATIVE):
            status[j] = CONFIRMED if med_imp[j] > med_shadow else REJECTED
            resolved.append(ds.columns[j])
    return BorutaResult(
        features=list(ds.columns),
        status={c: str(s) for c, s in zip(ds.columns, status)},
        hit_counts={c: int(h) for c, h in zip(ds.columns, hits)},
        iterations_run=it,
        importance_history=imp_history,
        shadow_max_history=shadow_history,
        decided_at=decided_at,
        resolved_by_median=resolved,
    )


def boruta_select(ds: Dataset, config: BorutaConfig = BorutaConfig()):
    """Boruta selection returning ``(BorutaResult, Dataset of confirmed columns)``."""
    result = run_boruta(ds, config)
    confirmed = result.confirmed
    if not confirmed:
        raise EmptySelectionError("Boruta confirmed no features")
    return result, ds.select_columns(confirmed)


def map_indicators_to_variables(result: BorutaResult, encoding: dict) -> dict:
    """Variable-level status: a source variable is confirmed iff any of its columns is.

    ``encoding`` maps column name to source variable (``Dataset.encoding_map``).
    A variable none of whose columns is confirmed is tentative if any column
    is, else rejected.
    """
    grouped = {}
    for column, status in result.status.items():
        if column not in encoding:
            raise DataError(f"column {column!r} missing from the encoding map")
        grouped.setdefault(encoding[column], []).append(status)
    out = {}
    for var, statuses in grouped.items():
        if CONFIRMED in statuses:
            out[var] = CONFIRMED
        elif TENTATIVE in statuses:
            out[var] = TENTATIVE
        else:
            out[var] = REJECTED
    return out
