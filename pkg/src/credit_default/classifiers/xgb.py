from dataclasses import dataclass, field

import numpy as np

from ..trees import NEWTON, DecisionTree, grow_tree, presort
from .loss import check_binary, log_loss, predict_labels, prior_log_odds, sigmoid


def leaf_weight(G, H, reg_lambda: float):
    """Minimizer ``-G / (H + lambda)`` of the regularized per-leaf objective."""
    return -np.asarray(G, dtype=np.float64) / (np.asarray(H, dtype=np.float64) + reg_lambda)


def split_gain(GL, HL, GR, HR, reg_lambda: float = 1.0, gamma: float = 0.0) -> float:
    def score(G, H):
        return G * G / (H + reg_lambda)
    return 0.5 * (score(GL, HL) + score(GR, HR) - score(GL + GR, HL + HR)) - gamma


@dataclass
class XgbModel:
    F0: float
    trees: list
    reg_lambda: float
    gamma: float
    learning_rate: float
    n_estimators: int
    max_depth: int
    min_child_weight: float = 1.0
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
                "reg_lambda": self.reg_lambda, "gamma": self.gamma,
                "learning_rate": self.learning_rate, "n_estimators": self.n_estimators,
                "max_depth": self.max_depth, "min_child_weight": self.min_child_weight}

    @classmethod
    def from_dict(cls, d):
        return cls(d["F0"], [DecisionTree.from_dict(t) for t in d["trees"]], d["reg_lambda"],
                   d["gamma"], d["learning_rate"], d["n_estimators"], d["max_depth"],
                   d["min_child_weight"])


def fit_xgb(X, y, reg_lambda: float = 1.0, gamma: float = 0.0, learning_rate: float = 0.3,
            n_estimators: int = 100, max_depth: int = 6, min_child_weight: float = 1.0,
            seed: int = 0) -> XgbModel:
    """Second-order boosting with exact greedy splits on g = p - y, h = p (1 - p).

    A split is kept only if its gain net of ``gamma`` is positive. ``seed`` is
    accepted for interface symmetry; the fit itself draws no random numbers.
    """
    X, y = check_binary(X, y)
    if reg_lambda < 0 or gamma < 0:
        raise ValueError("reg_lambda and gamma must be non-negative")
    if not 0 < learning_rate <= 1:
        raise ValueError("learning_rate must lie in (0, 1]")
    F0 = prior_log_odds(y)
    F = np.full(len(y), F0)
    order = presort(X)
    trees, losses = [], [log_loss(y, F)]
    for _ in range(n_estimators):
        p = sigmoid(F)
        g = p - y
        h = p * (1.0 - p)
        tree = grow_tree(X, h, g, NEWTON, max_depth, "all", 1, seed=seed, sorted_index=order,
                         reg_lambda=reg_lambda, gamma=gamma, min_child_weight=min_child_weight)
        tree.value = leaf_weight(tree.node_sum, tree.weight, reg_lambda)[:, None]
        F += learning_rate * tree.predict(X)
        trees.append(tree)
        losses.append(log_loss(y, F))
    return XgbModel(F0, trees, reg_lambda, gamma, learning_rate, n_estimators, max_depth,
                    min_child_weight, losses)


def score_xgb(model: XgbModel, X) -> np.ndarray:
    return model.score(X)
