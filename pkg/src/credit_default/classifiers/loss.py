"""Binary logistic loss on raw scores F (log-odds)."""

import numpy as np
from scipy.special import expit


def sigmoid(F):
    return expit(F)


def log_loss(y, F) -> float:
    """Mean negative log-likelihood, computed stably from log-odds."""
    y = np.asarray(y, dtype=np.float64)
    F = np.asarray(F, dtype=np.float64)
    # -[y log p + (1-y) log(1-p)] = log(1 + e^F) - y F
    return float(np.mean(np.logaddexp(0.0, F) - y * F))


def gradient(y, F):
    """d loss / dF per row."""
    return sigmoid(F) - y


def hessian(y, F):
    p = sigmoid(F)
    return p * (1.0 - p)


def prior_log_odds(y) -> float:
    p = float(np.mean(y))
    if not 0.0 < p < 1.0:
        raise ValueError("both classes must be present")
    return float(np.log(p / (1.0 - p)))


def check_binary(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError(f"X of shape {X.shape} does not match {len(y)} labels")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if len(np.unique(y)) < 2:
        raise ValueError("training data must contain both classes")
    return X, y.astype(np.float64)


def predict_labels(scores, threshold: float = 0.5) -> np.ndarray:
    """Label 1 iff score >= threshold."""
    return (np.asarray(scores) >= threshold).astype(np.int8)
