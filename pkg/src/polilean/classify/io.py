"""Versioned JSON container for trained models."""
from __future__ import annotations

import json

import numpy as np

from ..errors import DataError
from .base import Standardizer
from .forest import DecisionTree, RandomForestModel
from .gnb import GaussianNBModel
from .logreg import LogRegModel
from .majority import ConstantModel
from .svm import LinearSVMModel

FORMAT = "polilean-model"
VERSION = 1


def _plain(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_plain(x) for x in v]
    return v


def dump_model(model) -> str:
    return json.dumps({
        "format": FORMAT, "version": VERSION, "kind": model.kind,
        "n_classes": model.n_classes, "class_names": model.class_names,
        "present": model.present.tolist(), "params": _plain(model.params()),
    }, sort_keys=True)


def load_model(text: str):
    doc = json.loads(text)
    if doc.get("format") != FORMAT or doc.get("version") != VERSION:
        raise DataError("not a version-1 polilean model file")
    k, K, names, present, p = doc["kind"], doc["n_classes"], doc["class_names"], doc["present"], doc["params"]
    arr = {key: np.asarray(v) for key, v in p.items() if key != "trees"}
    if k == "logreg":
        return LogRegModel(K, present, arr["W"], arr["b"], Standardizer(arr["mean"], arr["scale"]), names)
    if k == "linsvm":
        return LinearSVMModel(K, present, arr["W"], Standardizer(arr["mean"], arr["scale"]), names)
    if k == "gnb":
        return GaussianNBModel(K, present, arr["means"], arr["variances"], arr["log_priors"], names)
    if k == "majority":
        return ConstantModel(K, present, names, label=int(p["label"]))
    if k == "rf":
        trees = []
        for t in p["trees"]:
            tree = DecisionTree()
            tree.feature = np.asarray(t["feature"], dtype=np.int64)
            tree.threshold = np.asarray(t["threshold"], dtype=np.float64)
            tree.left = np.asarray(t["left"], dtype=np.int64)
            tree.right = np.asarray(t["right"], dtype=np.int64)
            tree.value = np.asarray(t["value"], dtype=np.float64)
            tree.n_classes = K
            trees.append(tree)
        return RandomForestModel(K, present, trees, names)
    raise DataError(f"unknown model kind {k!r}")


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_model(model))


def read_model(path):
    with open(path, encoding="utf-8") as fh:
        return load_model(fh.read())
