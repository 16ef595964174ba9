from __future__ import annotations

import numpy as np

from .base import ClassifierModel, Dataset


class ConstantModel(ClassifierModel):
    """Predicts one class for every input."""

    kind = "majority"

    def __init__(self, n_classes, present, class_names=None, label=None):
        present = np.asarray(present, dtype=np.int64)
        super().__init__(n_classes, present[:1] if label is None else [label], class_names)
        self.label = int(self.present[0])

    def _scores(self, X):
        return np.zeros((len(X), 1))

    def params(self):
        return {"label": self.label}


def train_majority(data: Dataset) -> ConstantModel:
    """Most frequent training class; ties go to the lowest index."""
    counts = np.bincount(data.y, minlength=data.n_classes)
    return ConstantModel(data.n_classes, [], data.class_names, label=int(np.argmax(counts)))
