from dataclasses import dataclass, field

import numpy as np

from ..seeding import stream
from ..trees import REGRESS, DecisionTree, grow_tree, presort
from .loss import check_binary, log_loss, predict_labels, prior_log_odds, sigmoid

NEWTON_FLOOR = 1e-12


@dataclass
class GbmModel:
    F0: float
    trees: list
    learning_rate: float
    n_estimators: int
    max_depth: int
    subsample: float = 1.0
    max_features: object = "all"
    train_loss: list = field(default_factory=list)

    def raw_score(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        F = np.full(len(X), self.F0)
        for tree in self.trees:
            F += self.learning_rate * tree.predict(X)
        return F

    def score(self, X) -> np.ndarray:
        return sigmoid(self.raw_score(X))

    def predict(self, X) -> np.ndarray:
        return predict_labels(self.score(X))

    def to_dict(self) -> dict:
        return {"F0": self.F0, "trees": [t.to_dict() for t in self.trees],
                "learning_rate": self.learning_rate, "n_estimators": self.n_estimators,
                "max_depth": self.max_depth, "subsample": self.subsample,
                "max_features": self.max_features}

    @classmethod
    def from_dict(cls, d):
        return cls(d["F0"], [DecisionTree.from_dict(t) for t in d["trees"]], d["learning_rate"],
                   d["n_estimators"], d["max_depth"], d["subsample"], d["max_features"])


def newton_leaves(tree: DecisionTree, X, residual, hess, rows) -> None:
    """Overwrite leaf values in place with sum(residual) / sum(hessian) over ``rows``."""
    leaf = tree.apply(X[rows])
    num = np.bincount(leaf, weights=residual[rows], minlength=tree.n_nodes)
    den = np.bincount(leaf, weights=hess[rows], minlength=tree.n_nodes)
    tree.value = (num / np.maximum(den, NEWTON_FLOOR))[:, None]


def fit_gbm(X, y, learning_rate: float = 0.1, n_estimators: int = 100, max_depth: int = 3,
            subsample: float = 1.0, max_features="all", seed: int = 0,
            min_samples_leaf: int = 1) -> GbmModel:
    """Gradient boosting on logistic loss with least-squares trees and Newton leaves.

    Each round fits a regression tree to the residuals ``y - p`` on a row
    subsample drawn without replacement, then replaces every leaf value by
    the Newton step computed on the in-bag rows of that leaf.
    """
    X, y = check_binary(X, y)
    if not 0 < learning_rate <= 1:
        raise ValueError("learning_rate must lie in (0, 1]")
    if not 0 < subsample <= 1:
        raise ValueError("subsample must lie in (0, 1]")
    n = len(y)
    F0 = prior_log_odds(y)
    F = np.full(n, F0)
    order = presort(X)
    n_sub = max(1, int(round(subsample * n)))
    trees, losses = [], [log_loss(y, F)]
    for m in range(n_estimators):
        rng = stream(seed, "gbm", m)
        if n_sub < n:
            rows = np.sort(rng.choice(n, n_sub, replace=False))
            w = np.zeros(n)
            w[rows] = 1.0
        else:
            rows = np.arange(n)
            w = np.ones(n)
        p = sigmoid(F)
        residual = y - p
        tree = grow_tree(X, w, w * residual, REGRESS, max_depth, max_features, min_samples_leaf,
                         seed=int(rng.integers(2**63)), sorted_index=order, y=residual)
        newton_leaves(tree, X, residual, p * (1.0 - p), rows)
        F += learning_rate * tree.predict(X)
        trees.append(tree)
        losses.append(log_loss(y, F))
    return GbmModel(F0, trees, learning_rate, n_estimators, max_depth, subsample, max_features, losses)


def score_gbm(model: GbmModel, X) -> np.ndarray:
    return model.score(X)
