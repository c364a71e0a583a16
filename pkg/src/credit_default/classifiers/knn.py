from dataclasses import dataclass

import numpy as np

from ..neighbors import MANHATTAN, build_index, kneighbors
from .loss import check_binary


@dataclass
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int
    metric: str = MANHATTAN

    def __post_init__(self):
        self._index = build_index(self.X, self.metric)

    def neighbors(self, X):
        return kneighbors(self._index, np.asarray(X, dtype=np.float64), self.k)

    def score(self, X) -> np.ndarray:
        """Fraction of the k nearest training rows labeled 1."""
        idx, _ = self.neighbors(X)
        return self.y[idx].mean(axis=1)

    def predict(self, X) -> np.ndarray:
        """Majority vote; a tied vote goes to the class with the smaller summed
        neighbor distance, and to class 0 if those are equal too."""
        idx, dist = self.neighbors(X)
        lab = self.y[idx]
        ones = lab.sum(axis=1)
        zeros = self.k - ones
        d1 = np.where(lab == 1, dist, 0.0).sum(axis=1)
        d0 = np.where(lab == 0, dist, 0.0).sum(axis=1)
        out = (ones > zeros).astype(np.int8)
        tie = ones == zeros
        out[tie] = (d1[tie] < d0[tie]).astype(np.int8)
        return out

    def to_dict(self) -> dict:
        return {"X": self.X.tolist(), "y": self.y.tolist(), "k": self.k, "metric": self.metric}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["X"], dtype=np.float64), np.array(d["y"], dtype=np.float64),
                   d["k"], d["metric"])


def fit_knn(X, y, k: int = 5, metric: str = MANHATTAN) -> KnnModel:
    X, y = check_binary(X, y)
    if not 1 <= k <= len(X):
        raise ValueError(f"k={k} must lie in [1, {len(X)}]")
    return KnnModel(X.copy(), y.copy(), int(k), metric)


def score_knn(model: KnnModel, X) -> np.ndarray:
    return model.score(X)
