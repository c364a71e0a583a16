"""The six classifiers behind one registry: fit by name, score, and save to JSON."""

import json
from pathlib import Path

from .adaboost import AdaboostModel, fit_adaboost, learner_weight, score_adaboost
from .gbm import GbmModel, fit_gbm, score_gbm
from .knn import KnnModel, fit_knn, score_knn
from .lgbm import LgbmModel, fit_lgbm, score_lgbm
from .loss import predict_labels
from .naive_bayes import GaussianNbModel, fit_gaussian_nb, score_nb
from .xgb import XgbModel, fit_xgb, leaf_weight, score_xgb

FORMAT = "credit_default.model"
FORMAT_VERSION = 1

FITTERS = {
    "naive_bayes": fit_gaussian_nb,
    "knn": fit_knn,
    "adaboost": fit_adaboost,
    "gbm": fit_gbm,
    "xgboost": fit_xgb,
    "lightgbm": fit_lgbm,
}

MODEL_TYPES = {
    "naive_bayes": GaussianNbModel,
    "knn": KnnModel,
    "adaboost": AdaboostModel,
    "gbm": GbmModel,
    "xgboost": XgbModel,
    "lightgbm": LgbmModel,
}

# families that consume a seed
SEEDED = {"gbm", "xgboost", "lightgbm"}


def fit_model(name: str, X, y, seed: int = 0, **params):
    if name not in FITTERS:
        raise KeyError(f"unknown model {name!r}; expected one of {sorted(FITTERS)}")
    if name in SEEDED:
        params.setdefault("seed", seed)
    return FITTERS[name](X, y, **params)


def model_name(model) -> str:
    for name, cls in MODEL_TYPES.items():
        if isinstance(model, cls):
            return name
    raise TypeError(f"not a classifier model: {type(model).__name__}")


def model_to_json(model) -> str:
    doc = {"format": FORMAT, "version": FORMAT_VERSION, "model": model_name(model),
           "state": model.to_dict()}
    return json.dumps(doc, sort_keys=True)


def model_from_json(text: str):
    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise ValueError("not a serialized classifier")
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('version')}")
    return MODEL_TYPES[doc["model"]].from_dict(doc["state"])


def save_model(model, path) -> Path:
    path = Path(path)
    path.write_text(model_to_json(model), encoding="utf-8")
    return path


def load_model(path):
    return model_from_json(Path(path).read_text(encoding="utf-8"))


__all__ = [
    "AdaboostModel", "GaussianNbModel", "GbmModel", "KnnModel", "LgbmModel", "XgbModel",
    "FITTERS", "fit_model", "fit_adaboost", "fit_gaussian_nb", "fit_gbm", "fit_knn", "fit_lgbm",
    "fit_xgb", "score_adaboost", "score_gbm", "score_knn", "score_lgbm", "score_nb", "score_xgb",
    "learner_weight", "leaf_weight", "predict_labels", "save_model", "load_model",
    "model_to_json", "model_from_json",
]
