"""Multiclass classifiers over user feature vectors."""
from __future__ import annotations

from ..errors import ConfigError
from .base import ClassifierModel, Dataset, Standardizer
from .forest import DecisionTree, RandomForestModel, gini, split_impurity, train_rf
from .gnb import GaussianNBModel, train_gnb
from .io import dump_model, load_model, read_model, save_model
from .logreg import LogRegModel, softmax_loss_grad, train_logreg
from .majority import ConstantModel, train_majority
from .svm import LinearSVMModel, train_linsvm

KINDS = ("logreg", "gnb", "linsvm", "rf", "majority")

# Kernel SVMs were left out deliberately: they add nothing over the linear
# and tree models for these low-dimensional features.
REJECTED = {
    "svm-poly": "polynomial-kernel SVM is not provided; use linsvm, logreg or rf",
    "svm-rbf": "RBF-kernel SVM is not provided; use linsvm, logreg or rf",
}

_ALIASES = {"lr": "logreg", "nb": "gnb", "svm": "linsvm", "svm-linear": "linsvm", "mj": "majority"}


def resolve_kind(kind: str) -> str:
    k = kind.strip().lower()
    k = _ALIASES.get(k, k)
    if k in REJECTED:
        raise ConfigError(REJECTED[k])
    if k not in KINDS:
        raise ConfigError(f"unknown classifier {kind!r}; expected one of {', '.join(KINDS)}")
    return k


def train(kind: str, data: Dataset, seed: int = 0, **params) -> ClassifierModel:
    kind = resolve_kind(kind)
    if kind == "logreg":
        return train_logreg(data, **params)
    if kind == "gnb":
        return train_gnb(data)
    if kind == "linsvm":
        return train_linsvm(data, seed=seed, **params)
    if kind == "rf":
        return train_rf(data, seed=seed, **params)
    return train_majority(data)


__all__ = [
    "KINDS", "REJECTED", "ClassifierModel", "Dataset", "Standardizer", "DecisionTree",
    "RandomForestModel", "GaussianNBModel", "LogRegModel", "LinearSVMModel", "ConstantModel",
    "train", "resolve_kind", "train_logreg", "train_gnb", "train_linsvm", "train_rf", "train_majority",
    "gini", "split_impurity", "softmax_loss_grad", "save_model", "read_model", "dump_model", "load_model",
]
