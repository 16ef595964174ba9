"""Shared pieces for the classifiers: datasets, scaling, class bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    class_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim == 1:
            self.X = self.X[:, None]
        self.y = np.asarray(self.y, dtype=np.int64)
        if not self.class_names:
            self.class_names = [str(k) for k in range(int(self.y.max()) + 1 if len(self.y) else 0)]
        if len(self.y) != len(self.X):
            raise DataError(f"{len(self.X)} feature rows but {len(self.y)} labels")
        if len(self.y) and (self.y.min() < 0 or self.y.max() >= self.n_classes):
            raise DataError("label index outside the class list")
        if not np.isfinite(self.X).all():
            raise DataError("features contain non-finite values")

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def __len__(self) -> int:
        return len(self.y)


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        return cls(mean, np.where(std > 0, std, 1.0))

    def __call__(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale


class ClassifierModel:
    """Trained multiclass predictor over ``n_classes`` classes.

    ``present`` lists the class indices seen in training; absent classes are
    never predicted and get zero probability.
    """

    kind = "base"
    has_proba = True

    def __init__(self, n_classes: int, present, class_names=None):
        self.n_classes = int(n_classes)
        self.present = np.asarray(present, dtype=np.int64)
        self.class_names = list(class_names) if class_names is not None else [str(k) for k in range(n_classes)]
        self.info: dict = {}

    def _scores(self, X) -> np.ndarray:  # over present classes
        raise NotImplementedError

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.full((len(X), self.n_classes), -np.inf)
        out[:, self.present] = self._scores(X)
        return out

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1)

    def predict_proba(self, X) -> np.ndarray:
        s = self.decision_function(X)
        s = s - s.max(axis=1, keepdims=True)
        e = np.exp(s)
        return e / e.sum(axis=1, keepdims=True)

    def params(self) -> dict:
        raise NotImplementedError
