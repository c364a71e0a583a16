from dataclasses import dataclass, field

import numpy as np

from ..trees import CLASSIFY, DecisionTree, fit_cart, presort
from .loss import check_binary, predict_labels, sigmoid

ERROR_CLAMP = 1e-10


def learner_weight(error: float, learning_rate: float = 1.0) -> float:
    """``lr * 0.5 * ln((1 - e) / e)`` with e clamped away from 0 and 1."""
    e = min(max(error, ERROR_CLAMP), 1.0 - ERROR_CLAMP)
    return learning_rate * 0.5 * float(np.log((1.0 - e) / e))


@dataclass
class AdaboostModel:
    learners: list
    alphas: list
    n_estimators: int
    learning_rate: float = 1.0
    errors: list = field(default_factory=list)

    def margin(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.zeros(len(X))
        for tree, alpha in zip(self.learners, self.alphas):
            out += alpha * _signed(tree, X)
        return out

    def score(self, X) -> np.ndarray:
        return sigmoid(self.margin(X))

    def predict(self, X) -> np.ndarray:
        return predict_labels(self.score(X))

    def to_dict(self) -> dict:
        return {"learners": [t.to_dict() for t in self.learners], "alphas": list(self.alphas),
                "n_estimators": self.n_estimators, "learning_rate": self.learning_rate,
                "errors": list(self.errors)}

    @classmethod
    def from_dict(cls, d):
        return cls([DecisionTree.from_dict(t) for t in d["learners"]], d["alphas"],
                   d["n_estimators"], d["learning_rate"], d.get("errors", []))


def _signed(tree: DecisionTree, X) -> np.ndarray:
    # stumps vote +1 when the weighted positive share strictly exceeds one half
    return np.where(tree.predict(X)[:, 1] > 0.5, 1.0, -1.0)


def fit_adaboost(X, y, n_estimators: int = 50, learning_rate: float = 1.0,
                 weight_history: list | None = None) -> AdaboostModel:
    """Discrete AdaBoost on depth-1 CART stumps with labels mapped to -1/+1.

    Weights follow ``w *= exp(-alpha * y * h)`` and are renormalized each round.
    Boosting stops when a round after the first has weighted error >= 0.5, or
    right after a stump fits the weighted sample perfectly.
    ``weight_history``, if given, receives a copy of the weights after each round.
    """
    X, y = check_binary(X, y)
    if n_estimators < 1:
        raise ValueError("n_estimators must be positive")
    if not 0 < learning_rate:
        raise ValueError("learning_rate must be positive")
    n = len(y)
    y_pm = 2.0 * y - 1.0
    w = np.full(n, 1.0 / n)
    order = presort(X)
    learners, alphas, errors = [], [], []
    for k in range(n_estimators):
        stump = fit_cart(X, y, w, CLASSIFY, max_depth=1, sorted_index=order)
        h = _signed(stump, X)
        e = float(w[h != y_pm].sum() / w.sum())
        if k > 0 and e >= 0.5:
            break
        alpha = learner_weight(e, learning_rate)
        learners.append(stump)
        alphas.append(alpha)
        errors.append(e)
        w = w * np.exp(-alpha * y_pm * h)
        w /= w.sum()
        if weight_history is not None:
            weight_history.append(w.copy())
        if e <= ERROR_CLAMP:
            break
    return AdaboostModel(learners, alphas, n_estimators, learning_rate, errors)


def score_adaboost(model: AdaboostModel, X) -> np.ndarray:
    return model.score(X)
