"""Exact brute-force neighbor queries under Euclidean and Manhattan distance.

Results are always sorted by distance with ties broken by lower row index, so
every consumer (KNN, DBSCAN, SMOTE, ADASYN, Tomek links) is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

EUCLIDEAN = "euclidean"
MANHATTAN = "manhattan"
_CDIST_NAME = {EUCLIDEAN: "euclidean", MANHATTAN: "cityblock"}

# floats per distance block; keeps the working set near 64 MB
_BLOCK_FLOATS = 8_000_000


def distance(a, b, metric: str = EUCLIDEAN) -> float:
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    if metric == EUCLIDEAN:
        return float(np.sqrt(np.dot(diff, diff)))
    if metric == MANHATTAN:
        return float(np.abs(diff).sum())
    raise ValueError(f"unknown metric {metric!r}")


@dataclass(frozen=True, eq=False)
class NeighborIndex:
    points: np.ndarray
    metric: str = EUCLIDEAN

    def __post_init__(self):
        if self.metric not in _CDIST_NAME:
            raise ValueError(f"unknown metric {self.metric!r}")
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-D array")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def pairwise(self, queries: np.ndarray) -> np.ndarray:
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        if queries.shape[1] != self.points.shape[1]:
            raise ValueError(f"query has {queries.shape[1]} dims, index has {self.points.shape[1]}")
        return cdist(queries, self.points, _CDIST_NAME[self.metric])

    def blocks(self, n_queries: int):
        step = max(1, _BLOCK_FLOATS // max(self.n, 1))
        for start in range(0, n_queries, step):
            yield start, min(start + step, n_queries)


def build_index(points, metric: str = EUCLIDEAN) -> NeighborIndex:
    return NeighborIndex(points, metric)


def _smallest_k(D: np.ndarray, k: int):
    """Row-wise k smallest entries ordered by (distance, column)."""
    b, n = D.shape
    kth = np.partition(D, k - 1, axis=1)[:, k - 1]
    mask = D <= kth[:, None]
    counts = mask.sum(axis=1)
    idx = np.empty((b, k), dtype=np.int64)
    simple = counts == k
    if simple.any():
        # nonzero walks each row left to right, so columns come out ascending
        cols = np.nonzero(mask[simple])[1].reshape(-1, k)
        idx[simple] = cols
    for r in np.flatnonzero(~simple):
        cand = np.flatnonzero(mask[r])
        order = np.lexsort((cand, D[r, cand]))
        idx[r] = cand[order[:k]]
    dist = np.take_along_axis(D, idx, axis=1)
    order = np.argsort(dist, axis=1, kind="stable")
    return np.take_along_axis(idx, order, axis=1), np.take_along_axis(dist, order, axis=1)


def kneighbors(index: NeighborIndex, queries, k: int, exclude=None):
    """Exact k nearest neighbors for each query row.

    ``exclude`` optionally gives, per query, one stored row index to leave out
    (the query's own row when querying the index with its own points).
    Returns ``(indices, distances)``, both of shape ``(n_queries, k)``.
    """
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    available = index.n - (0 if exclude is None else 1)
    if k < 1 or k > available:
        raise ValueError(f"k={k} but only {available} candidates are available")
    if exclude is not None:
        exclude = np.asarray(exclude, dtype=np.int64)
        if exclude.shape != (queries.shape[0],):
            raise ValueError("exclude needs one row index per query")
    out_idx = np.empty((queries.shape[0], k), dtype=np.int64)
    out_dist = np.empty((queries.shape[0], k))
    for lo, hi in index.blocks(queries.shape[0]):
        D = index.pairwise(queries[lo:hi])
        if exclude is not None:
            D[np.arange(hi - lo), exclude[lo:hi]] = np.inf
        out_idx[lo:hi], out_dist[lo:hi] = _smallest_k(D, k)
    return out_idx, out_dist


def knn_query(index: NeighborIndex, query, k: int, exclude_self: bool = False):
    """k nearest stored rows to one query as a list of ``(row, distance)``.

    ``query`` is either a coordinate vector or an integer row of the index.
    With ``exclude_self`` the query's own row is skipped: the given row, or
    for a coordinate vector the lowest-index stored row equal to it.
    """
    self_row = None
    if isinstance(query, (int, np.integer)):
        self_row = int(query)
        point = index.points[self_row]
    else:
        point = np.asarray(query, dtype=np.float64)
        if exclude_self:
            equal = np.flatnonzero((index.points == point).all(axis=1))
            self_row = int(equal[0]) if len(equal) else None
    exclude = None
    if exclude_self and self_row is not None:
        exclude = np.array([self_row])
    idx, dist = kneighbors(index, point[None, :], k, exclude)
    return [(int(i), float(d)) for i, d in zip(idx[0], dist[0])]


def range_query(index: NeighborIndex, query, eps: float) -> np.ndarray:
    """Sorted row indices within distance ``eps`` (inclusive) of ``query``.

    ``query`` is a coordinate vector or an integer row of the index.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if isinstance(query, (int, np.integer)):
        query = index.points[int(query)]
    D = index.pairwise(np.asarray(query, dtype=np.float64)[None, :])[0]
    return np.flatnonzero(D <= eps)


def range_counts(index: NeighborIndex, queries, eps: float) -> np.ndarray:
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    counts = np.empty(queries.shape[0], dtype=np.int64)
    for lo, hi in index.blocks(queries.shape[0]):
        counts[lo:hi] = (index.pairwise(queries[lo:hi]) <= eps).sum(axis=1)
    return counts


def range_neighbors(index: NeighborIndex, queries, eps: float) -> list:
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    out = []
    for lo, hi in index.blocks(queries.shape[0]):
        D = index.pairwise(queries[lo:hi])
        out.extend(np.flatnonzero(row <= eps) for row in D)
    return out
