"""Gaussian naive Bayes."""
from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .base import ClassifierModel, Dataset


class GaussianNBModel(ClassifierModel):
    kind = "gnb"

    def __init__(self, n_classes, present, means, variances, log_priors, class_names=None):
        super().__init__(n_classes, present, class_names)
        self.means, self.variances, self.log_priors = means, variances, log_priors

    def _scores(self, X):
        ll = -0.5 * (np.log(2 * np.pi * self.variances).sum(1)[None, :]
                     + (((X[:, None, :] - self.means[None]) ** 2) / self.variances[None]).sum(-1))
        return ll + self.log_priors

    def predict_proba(self, X):
        s = self.decision_function(X)
        return np.exp(s - logsumexp(s, axis=1, keepdims=True))

    def params(self):
        return {"means": self.means, "variances": self.variances, "log_priors": self.log_priors}


def train_gnb(data: Dataset) -> GaussianNBModel:
    """Per-class means and variances; variances floored at 1e-9 x the largest feature variance."""
    present = np.unique(data.y)
    max_var = float(data.X.var(axis=0).max()) if len(data) else 0.0
    floor = 1e-9 * max_var if max_var > 0 else 1e-9
    means = np.array([data.X[data.y == k].mean(0) for k in present])
    variances = np.maximum(np.array([data.X[data.y == k].var(0) for k in present]), floor)
    counts = np.array([(data.y == k).sum() for k in present], dtype=np.float64)
    return GaussianNBModel(data.n_classes, present, means, variances, np.log(counts / counts.sum()), data.class_names)
