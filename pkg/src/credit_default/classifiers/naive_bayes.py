from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .loss import check_binary, predict_labels


@dataclass
class GaussianNbModel:
    log_prior: np.ndarray   # (2,)
    mean: np.ndarray        # (2, d)
    var: np.ndarray         # (2, d), smoothed
    epsilon: float

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((len(X), 2))
        for c in (0, 1):
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * self.var[c]))
            ll = ll - 0.5 * np.sum((X - self.mean[c]) ** 2 / self.var[c], axis=1)
            out[:, c] = self.log_prior[c] + ll
        return out

    def score(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return np.exp(jll[:, 1] - logsumexp(jll, axis=1))

    def predict(self, X) -> np.ndarray:
        return predict_labels(self.score(X))

    def to_dict(self) -> dict:
        return {"log_prior": self.log_prior.tolist(), "mean": self.mean.tolist(),
                "var": self.var.tolist(), "epsilon": self.epsilon}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["log_prior"]), np.array(d["mean"]), np.array(d["var"]), d["epsilon"])


def fit_gaussian_nb(X, y, var_smoothing: float = 1e-9) -> GaussianNbModel:
    """Per-class Gaussian likelihoods with variance floor ``var_smoothing * max feature variance``.

    When every feature is constant the floor falls back to ``var_smoothing``
    itself so the variances stay positive.
    """
    X, y = check_binary(X, y)
    max_var = float(np.var(X, axis=0).max())
    eps = var_smoothing * max_var if max_var > 0 else var_smoothing
    mean = np.empty((2, X.shape[1]))
    var = np.empty((2, X.shape[1]))
    prior = np.empty(2)
    for c in (0, 1):
        Xc = X[y == c]
        mean[c] = Xc.mean(axis=0)
        var[c] = Xc.var(axis=0) + eps
        prior[c] = len(Xc) / len(X)
    return GaussianNbModel(np.log(prior), mean, var, eps)


def score_nb(model: GaussianNbModel, X) -> np.ndarray:
    return model.score(X)
