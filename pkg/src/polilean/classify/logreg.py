"""L2-regularised multinomial logistic regression."""
from __future__ import annotations

import logging
import warnings

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .base import ClassifierModel, Dataset, Standardizer
from .majority import ConstantModel

log = logging.getLogger(__name__)


def softmax_loss_grad(W, b, X, Y, l2):
    """Summed cross-entropy plus ``0.5 * l2 * |W|^2``.

    ``W`` is ``K x d``, ``b`` length ``K``, ``Y`` one-hot ``n x K``.
    Returns ``(loss, dW, db)``.
    """
    Z = X @ W.T + b
    lse = logsumexp(Z, axis=1)
    loss = float((lse - (Z * Y).sum(1)).sum() + 0.5 * l2 * (W**2).sum())
    R = np.exp(Z - lse[:, None]) - Y
    return loss, R.T @ X + l2 * W, R.sum(0)


class LogRegModel(ClassifierModel):
    kind = "logreg"

    def __init__(self, n_classes, present, W, b, scaler, class_names=None):
        super().__init__(n_classes, present, class_names)
        self.W, self.b, self.scaler = W, b, scaler

    def _scores(self, X):
        return self.scaler(X) @ self.W.T + self.b

    def params(self):
        return {"W": self.W, "b": self.b, "mean": self.scaler.mean, "scale": self.scaler.scale}


def train_logreg(data: Dataset, l2: float = 1.0, max_iter: int = 200, tol: float = 1e-6):
    present = np.unique(data.y)
    if len(present) < 2:
        warnings.warn("single class in training data; model predicts it everywhere", RuntimeWarning, stacklevel=2)
        return ConstantModel(data.n_classes, present, data.class_names)
    scaler = Standardizer.fit(data.X)
    X = scaler(data.X)
    K, d = len(present), X.shape[1]
    Y = (data.y[:, None] == present[None, :]).astype(np.float64)

    def fun(theta):
        W = theta[: K * d].reshape(K, d)
        loss, dW, db = softmax_loss_grad(W, theta[K * d :], X, Y, l2)
        return loss, np.concatenate([dW.ravel(), db])

    theta0 = np.zeros(K * d + K)
    g0 = np.linalg.norm(fun(theta0)[1])
    res = minimize(fun, theta0, jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "gtol": tol * max(1.0, g0) / np.sqrt(len(theta0)), "ftol": 0.0})
    gnorm = float(np.linalg.norm(fun(res.x)[1]))
    W = res.x[: K * d].reshape(K, d)
    b = res.x[K * d :]
    model = LogRegModel(data.n_classes, present, W, b - b.mean(), scaler, data.class_names)
    model.info = {"iterations": int(res.nit), "grad_norm": gnorm,
                  "converged": gnorm <= tol * max(1.0, g0), "loss": float(res.fun)}
    return model
