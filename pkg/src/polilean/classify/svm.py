"""One-vs-rest linear SVM trained by stochastic subgradient descent.

Each class solves ``0.5 |w|^2 + C * sum hinge`` on standardised features with
the bias folded in as a constant feature.  Steps follow the Pegasos schedule;
after every epoch the averaged iterate is a candidate and the model keeps the
best candidate seen so far, so the reported objective never increases.
"""
from __future__ import annotations

import warnings

import numpy as np

from .._accel import kernel
from .base import ClassifierModel, Dataset, Standardizer
from .majority import ConstantModel


@kernel
def pegasos_epoch(X, Y, lam, order, t0, W, avg):
    """One pass in ``order`` updating all one-vs-rest rows of ``W``.

    ``avg`` receives the mean iterate over the pass.  Returns the step count.
    """
    n, d = X.shape
    K = W.shape[0]
    for k in range(K):
        for a in range(d):
            avg[k, a] = 0.0
    t = t0
    for m in range(order.shape[0]):
        i = order[m]
        t += 1
        eta = 1.0 / (lam * t)
        for k in range(K):
            s = 0.0
            for a in range(d):
                s += W[k, a] * X[i, a]
            shrink = 1.0 - eta * lam
            if Y[i, k] * s < 1.0:
                for a in range(d):
                    W[k, a] = shrink * W[k, a] + eta * Y[i, k] * X[i, a]
            else:
                for a in range(d):
                    W[k, a] = shrink * W[k, a]
            for a in range(d):
                avg[k, a] += W[k, a] / order.shape[0]
    return t


def hinge_objective(W, X, Y, c):
    margins = np.maximum(0.0, 1.0 - Y * (X @ W.T))
    return 0.5 * (W**2).sum(1) + c * margins.sum(0)


class LinearSVMModel(ClassifierModel):
    kind = "linsvm"
    has_proba = False

    def __init__(self, n_classes, present, W, scaler, class_names=None):
        super().__init__(n_classes, present, class_names)
        self.W, self.scaler = W, scaler

    def _scores(self, X):
        Z = self.scaler(X)
        return Z @ self.W[:, :-1].T + self.W[:, -1]

    def predict_proba(self, X):
        raise NotImplementedError("linear SVM has no probability estimates")

    def params(self):
        return {"W": self.W, "mean": self.scaler.mean, "scale": self.scaler.scale}


def train_linsvm(data: Dataset, c: float = 1.0, epochs: int = 50, seed: int = 0):
    present = np.unique(data.y)
    if len(present) < 2:
        warnings.warn("single class in training data; model predicts it everywhere", RuntimeWarning, stacklevel=2)
        return ConstantModel(data.n_classes, present, data.class_names)
    scaler = Standardizer.fit(data.X)
    X = np.hstack([scaler(data.X), np.ones((len(data), 1))])
    n = len(X)
    Y = np.where(data.y[:, None] == present[None, :], 1.0, -1.0)
    lam = 1.0 / (c * n)
    rng = np.random.default_rng(seed)
    W = np.zeros((len(present), X.shape[1]))
    avg = np.zeros_like(W)
    best = W.copy()
    best_obj = hinge_objective(best, X, Y, c)
    history = [float(best_obj.sum())]
    t = 0
    for _ in range(epochs):
        t = pegasos_epoch(X, Y, lam, rng.permutation(n), t, W, avg)
        obj = hinge_objective(avg, X, Y, c)
        better = obj < best_obj
        best[better] = avg[better]
        best_obj = np.where(better, obj, best_obj)
        history.append(float(best_obj.sum()))
    model = LinearSVMModel(data.n_classes, present, best, scaler, data.class_names)
    model.info = {"objective_history": history}
    return model
