"""DBSCAN clustering used to flag and drop density outliers."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .neighbors import EUCLIDEAN, build_index, range_counts, range_neighbors
from .tabular import Dataset

NOISE = -1


@dataclass(frozen=True)
class DbscanConfig:
    eps: float = 0.5
    min_pts: int = 5  # neighborhood size including the point itself
    metric: str = EUCLIDEAN

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be at least 1")


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    core: np.ndarray

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    @property
    def n_noise(self) -> int:
        return int(np.sum(self.labels == NOISE))

    def to_csv(self, path, row_ids) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row_id", "label"])
            writer.writerows(zip(map(int, row_ids), map(int, self.labels)))
        return path


def dbscan(points, config: DbscanConfig = DbscanConfig()) -> ClusterAssignment:
    """Classic DBSCAN with breadth-first cluster expansion in row order.

    A point is core when at least ``min_pts`` points (itself included) lie
    within ``eps``. Clusters are seeded from unlabeled core points in row
    order; a border point keeps the first cluster that reaches it.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise DataError("dbscan needs a non-empty 2-D point matrix")
    if not np.isfinite(points).all():
        raise DataError("dbscan input contains NaN or Inf")
    index = build_index(points, config.metric)
    core = range_counts(index, points, config.eps) >= config.min_pts
    labels = np.full(len(points), NOISE, dtype=np.int64)
    cluster = 0
    for seed in np.flatnonzero(core):
        if labels[seed] != NOISE:
            continue
        labels[seed] = cluster
        frontier = np.array([seed])
        while len(frontier):
            reached = []
            for nb in range_neighbors(index, points[frontier], config.eps):
                fresh = nb[labels[nb] == NOISE]
                labels[fresh] = cluster
                reached.append(fresh[core[fresh]])
            frontier = np.concatenate(reached) if reached else np.array([], dtype=np.int64)
        cluster += 1
    return ClusterAssignment(labels, core)


def remove_outliers(ds: Dataset, assignment: ClusterAssignment):
    """Drop rows labeled as noise; returns ``(Dataset, per-class survivor counts)``."""
    if len(assignment.labels) != ds.n_rows:
        raise DataError(f"assignment has {len(assignment.labels)} labels for {ds.n_rows} rows")
    kept = ds.take(assignment.labels != NOISE)
    if kept.n_rows == 0:
        warnings.warn("DBSCAN labeled every row as noise; the dataset is now empty", RuntimeWarning)
    return kept, kept.class_counts()
