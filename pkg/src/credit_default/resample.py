"""Minority oversampling: SMOTE, SMOTE followed by Tomek-link cleaning, ADASYN.

All neighbor searches are exact Euclidean in the given (z-scored) space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import METHODS
from .errors import ConfigError, DataError
from .neighbors import EUCLIDEAN, build_index, kneighbors
from .tabular import Dataset


@dataclass(frozen=True)
class ResampleConfig:
    method: str = "none"
    k_neighbors: int = 5
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown resampling method {self.method!r}; expected one of {METHODS}")
        if self.k_neighbors < 1:
            raise ConfigError("k_neighbors must be at least 1")
        if not 0 < self.beta <= 1:
            raise ConfigError("beta must lie in (0, 1]")


@dataclass
class SyntheticBatch:
    """Synthetic points with their provenance (positions within the minority block)."""

    X: np.ndarray
    parent: np.ndarray
    neighbor: np.ndarray
    u: np.ndarray


@dataclass
class TomekLinkSet:
    pairs: list          # (row_id_a, row_id_b), a from class 0, b from class 1
    positions: list      # same pairs as row positions

    def __len__(self):
        return len(self.pairs)

    def row_ids(self) -> set:
        return {r for pair in self.pairs for r in pair}


def _classes(ds: Dataset):
    counts = ds.class_counts()
    minority = 1 if counts[1] <= counts[0] else 0
    return minority, 1 - minority, counts[minority], counts[1 - minority]


def minority_neighbors(X_min: np.ndarray, k: int) -> np.ndarray:
    """k nearest minority neighbors (self excluded) for every minority row."""
    m = len(X_min)
    idx, _ = kneighbors(build_index(X_min, EUCLIDEAN), X_min, k, exclude=np.arange(m))
    return idx


def interpolate(X_min: np.ndarray, neighbors: np.ndarray, parents: np.ndarray,
                rng: np.random.Generator) -> SyntheticBatch:
    """One synthetic point per entry of ``parents``: parent + u * (neighbor - parent).

    The neighbor is drawn uniformly from the parent's row of ``neighbors`` and
    ``u ~ U(0, 1)``. Results are clipped to the parents' bounding box so
    rounding can never leave the segment's coordinate range.
    """
    parents = np.asarray(parents, dtype=np.int64)
    k = neighbors.shape[1]
    pick = rng.integers(0, k, size=len(parents))
    nb = neighbors[parents, pick]
    u = rng.random(len(parents))
    a, b = X_min[parents], X_min[nb]
    X_new = a + u[:, None] * (b - a)
    X_new = np.clip(X_new, np.minimum(a, b), np.maximum(a, b))
    return SyntheticBatch(X_new, parents, nb, u)


def _append(ds: Dataset, X_new: np.ndarray, label: int) -> Dataset:
    n_new = len(X_new)
    start = int(ds.row_ids.max()) + 1 if ds.n_rows else 0
    return Dataset(
        np.vstack([ds.X, X_new]),
        ds.columns,
        np.concatenate([ds.y, np.full(n_new, label, dtype=np.int8)]),
        np.concatenate([ds.row_ids, np.arange(start, start + n_new)]),
        ds.kinds,
        ds.groups,
        np.concatenate([ds.synthetic, np.ones(n_new, dtype=bool)]),
    )


def smote_batch(ds: Dataset, k: int = 5, seed: int = 0) -> SyntheticBatch:
    """SMOTE draws for ``ds``: ``M - m`` points, parents cycling through a seeded shuffle."""
    minority, _, m, M = _classes(ds)
    if m < 2:
        raise DataError(f"SMOTE needs at least 2 minority rows, got {m}")
    rng = np.random.default_rng(seed)
    X_min = ds.X[ds.y == minority]
    k = min(k, m - 1)
    order = rng.permutation(m)
    parents = np.resize(order, M - m)
    return interpolate(X_min, minority_neighbors(X_min, k), parents, rng)


def smote(ds: Dataset, k: int = 5, seed: int = 0) -> Dataset:
    """Oversample the minority class until both classes have the majority count."""
    minority, _, m, M = _classes(ds)
    if m < 2:
        raise DataError(f"SMOTE needs at least 2 minority rows, got {m}")
    if m == M:
        return ds
    return _append(ds, smote_batch(ds, k, seed).X, minority)


def tomek_links(ds: Dataset) -> TomekLinkSet:
    """Opposite-class pairs that are each other's nearest neighbor (ties: lower row)."""
    counts = ds.class_counts()
    if counts[0] == 0 or counts[1] == 0:
        raise DataError("Tomek links need both classes present")
    if ds.n_rows < 2:
        return TomekLinkSet([], [])
    nn, _ = kneighbors(build_index(ds.X, EUCLIDEAN), ds.X, 1, exclude=np.arange(ds.n_rows))
    nn = nn[:, 0]
    i = np.arange(ds.n_rows)
    mutual = (nn[nn] == i) & (ds.y != ds.y[nn]) & (i < nn)
    positions = []
    for a in np.flatnonzero(mutual):
        b = int(nn[a])
        pair = (int(a), b) if ds.y[a] == 0 else (b, int(a))
        positions.append(pair)
    pairs = [(int(ds.row_ids[a]), int(ds.row_ids[b])) for a, b in positions]
    return TomekLinkSet(pairs, positions)


def smote_tomek(ds: Dataset, k: int = 5, seed: int = 0) -> Dataset:
    """SMOTE, then one pass removing both endpoints of every Tomek link."""
    balanced = smote(ds, k, seed)
    links = tomek_links(balanced)
    if not len(links):
        return balanced
    drop = np.zeros(balanced.n_rows, dtype=bool)
    drop[[p for pair in links.positions for p in pair]] = True
    return balanced.take(~drop)


def adasyn_allocation(ds: Dataset, k: int = 5, beta: float = 1.0):
    """Per-minority-row synthetic counts ``g_i`` plus the density ratios.

    ``r_i`` is the majority share among the row's k nearest neighbors of any
    class; normalized ratios scale the budget ``G = round(beta (M - m))`` and
    are rounded half up per row. A minority with no majority neighbors at all
    falls back to the uniform allocation.
    """
    minority, _, m, M = _classes(ds)
    if m < 2:
        raise DataError(f"ADASYN needs at least 2 minority rows, got {m}")
    rows = np.flatnonzero(ds.y == minority)
    k_all = min(k, ds.n_rows - 1)
    nn, _ = kneighbors(build_index(ds.X, EUCLIDEAN), ds.X[rows], k_all, exclude=rows)
    r = (ds.y[nn] != minority).sum(axis=1) / k_all
    total = r.sum()
    r_hat = r / total if total > 0 else np.full(m, 1.0 / m)
    G = int(np.floor(beta * (M - m) + 0.5))
    g = np.floor(r_hat * G + 0.5).astype(np.int64)
    return g, r_hat, G


def adasyn(ds: Dataset, k: int = 5, beta: float = 1.0, seed: int = 0) -> Dataset:
    """Density-adaptive oversampling; harder minority rows get more synthetic points."""
    minority, _, m, _ = _classes(ds)
    g, _, _ = adasyn_allocation(ds, k, beta)
    if g.sum() == 0:
        return ds
    rng = np.random.default_rng(seed)
    X_min = ds.X[ds.y == minority]
    neighbors = minority_neighbors(X_min, min(k, m - 1))
    parents = np.repeat(np.arange(m), g)
    return _append(ds, interpolate(X_min, neighbors, parents, rng).X, minority)


def resample(ds: Dataset, config: ResampleConfig) -> Dataset:
    if config.method == "none":
        return ds
    if config.method == "smote":
        return smote(ds, config.k_neighbors, config.seed)
    if config.method == "smote_tomek":
        return smote_tomek(ds, config.k_neighbors, config.seed)
    return adasyn(ds, config.k_neighbors, config.beta, config.seed)
