"""PCA and exact t-SNE down to two dimensions."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from ._accel import kernel
from .embedding import EmbeddingMatrix
from .errors import ConfigError, NumericError

log = logging.getLogger(__name__)

METHODS = ("pca", "tsne")


@dataclass
class ReductionConfig:
    method: str = "tsne"
    out_dim: int = 2
    perplexity: float = 30.0
    iterations: int = 1000
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    lr: float = 200.0
    seed: int = 0

    def validate(self) -> "ReductionConfig":
        if self.method not in METHODS:
            raise ConfigError(f"unknown reduction {self.method!r}; expected one of {', '.join(METHODS)}")
        if self.out_dim < 1:
            raise ConfigError("out_dim must be >= 1")
        if not self.perplexity > 1:
            raise ConfigError("perplexity must exceed 1")
        return self


# ----------------------------------------------------------------------
# PCA


class PCA:
    """Principal components from the covariance eigendecomposition.

    Each component is signed so its largest-magnitude loading is positive.
    """

    def __init__(self, out_dim: int = 2):
        self.out_dim = out_dim

    def fit(self, X) -> "PCA":
        X = np.asarray(X, dtype=np.float64)
        n, d = X.shape
        if n < self.out_dim or d < self.out_dim:
            raise ConfigError(f"PCA to {self.out_dim} dims needs at least that many rows and columns, got {X.shape}")
        self.mean_ = X.mean(axis=0)
        Xc = X - self.mean_
        cov = Xc.T @ Xc / max(n - 1, 1)
        evals, evecs = np.linalg.eigh(cov)
        order = np.argsort(evals)[::-1]
        evals = np.clip(evals[order], 0.0, None)
        evecs = evecs[:, order]
        top = np.argmax(np.abs(evecs), axis=0)
        evecs = evecs * np.where(evecs[top, np.arange(d)] < 0, -1.0, 1.0)
        self.components_ = evecs[:, : self.out_dim].T
        self.explained_variance_ = evals[: self.out_dim]
        total = evals.sum()
        self.explained_variance_ratio_ = evals[: self.out_dim] / total if total > 0 else np.zeros(self.out_dim)
        rank = int((evals > evals.max(initial=0.0) * 1e-12).sum()) if total > 0 else 0
        if rank < self.out_dim:
            warnings.warn(f"input rank {rank} < {self.out_dim}; trailing components carry zero variance",
                          RuntimeWarning, stacklevel=2)
        return self

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean_) @ self.components_.T

    def fit_transform(self, X) -> np.ndarray:
        return self.fit(X).transform(X)


def pca_fit_transform(X, out_dim: int = 2) -> np.ndarray:
    return PCA(out_dim).fit_transform(X)


# ----------------------------------------------------------------------
# t-SNE affinities


def sq_distances(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    sq = (X**2).sum(1)
    D = sq[:, None] + sq[None, :] - 2.0 * X @ X.T
    np.fill_diagonal(D, 0.0)
    return np.maximum(D, 0.0)


@kernel
def _calibrate_kernel(D, target, tol, max_iter, P, betas):
    n = D.shape[0]
    for i in range(n):
        dmin = np.inf
        for j in range(n):
            if j != i and D[i, j] < dmin:
                dmin = D[i, j]
        lo = 0.0
        hi = np.inf
        beta = 1.0
        s = 1.0
        for _ in range(max_iter):
            s = 0.0
            sd = 0.0
            for j in range(n):
                if j == i:
                    P[i, j] = 0.0
                    continue
                v = np.exp(-(D[i, j] - dmin) * beta)
                P[i, j] = v
                s += v
                sd += v * (D[i, j] - dmin)
            # entropy in nats of the normalised row
            H = np.log(s) + beta * sd / s
            diff = H - target
            if abs(diff) < tol:
                break
            if diff > 0:
                lo = beta
                beta = beta * 2.0 if hi == np.inf else (beta + hi) / 2.0
            else:
                hi = beta
                beta = (beta + lo) / 2.0
        for j in range(n):
            P[i, j] /= s
        betas[i] = beta


def calibrate_conditionals(D, perplexity: float, tol: float = 1e-10, max_iter: int = 200):
    """Row-conditional Gaussian affinities matching ``perplexity``.

    Returns ``(P, betas)`` where row ``i`` of ``P`` is p(j | i) and
    ``betas[i] = 1 / (2 sigma_i^2)``.
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    n = D.shape[0]
    P = np.zeros((n, n))
    betas = np.zeros(n)
    _calibrate_kernel(D, float(np.log(perplexity)), tol, max_iter, P, betas)
    return P, betas


def entropy_bits(P) -> np.ndarray:
    """Shannon entropy (bits) of each row distribution."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log2(np.where(P > 0, P, 1.0)), 0.0)
    return -terms.sum(axis=1)


def joint_probabilities(X, perplexity: float) -> np.ndarray:
    P, _ = calibrate_conditionals(sq_distances(X), perplexity)
    n = len(P)
    P = (P + P.T) / (2.0 * n)
    return np.maximum(P, 1e-12)


def _student_q(Y):
    num = 1.0 / (1.0 + sq_distances(Y))
    np.fill_diagonal(num, 0.0)
    return num, np.maximum(num / num.sum(), 1e-12)


def kl_divergence(P, Y) -> float:
    _, Q = _student_q(Y)
    mask = ~np.eye(len(P), dtype=bool)
    return float((P[mask] * np.log(P[mask] / Q[mask])).sum())


def _kl_grad_numpy(P, Y, grad):
    num, Q = _student_q(Y)
    W = (P - Q) * num
    grad[:] = 4.0 * (W.sum(1)[:, None] * Y - W @ Y)


@kernel(fallback=_kl_grad_numpy)
def _kl_grad_kernel(P, Y, grad):
    n, k = Y.shape
    num = np.zeros((n, n))
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d = 0.0
            for a in range(k):
                t = Y[i, a] - Y[j, a]
                d += t * t
            v = 1.0 / (1.0 + d)
            num[i, j] = v
            num[j, i] = v
            total += 2.0 * v
    for i in range(n):
        for a in range(k):
            grad[i, a] = 0.0
        for j in range(n):
            if j == i:
                continue
            q = num[i, j] / total
            if q < 1e-12:
                q = 1e-12
            w = (P[i, j] - q) * num[i, j]
            for a in range(k):
                grad[i, a] += 4.0 * w * (Y[i, a] - Y[j, a])


def kl_gradient(P, Y) -> np.ndarray:
    grad = np.zeros_like(Y, dtype=np.float64)
    _kl_grad_kernel(np.ascontiguousarray(P), np.ascontiguousarray(Y, dtype=np.float64), grad)
    return grad


def tsne(X, cfg: ReductionConfig | None = None, return_history: bool = False):
    """Exact t-SNE.

    Momentum gradient descent with per-coordinate gains; early exaggeration
    multiplies P for the first ``exaggeration_iters`` iterations.  With
    ``return_history`` the KL divergence after every iteration is returned too.
    """
    cfg = (cfg or ReductionConfig()).validate()
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    if n < 4:
        raise ConfigError("t-SNE needs at least 4 points")
    if cfg.perplexity >= n - 1:
        raise ConfigError(f"perplexity {cfg.perplexity} must be below n - 1 = {n - 1}")
    if cfg.perplexity > (n - 1) / 3:
        log.warning("perplexity %.1f is large for %d points", cfg.perplexity, n)
    P = joint_probabilities(X, cfg.perplexity)
    rng = np.random.default_rng(cfg.seed)
    Y = rng.normal(0.0, 1e-4, size=(n, cfg.out_dim))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    grad = np.zeros_like(Y)
    history = []
    for it in range(cfg.iterations):
        exag = cfg.early_exaggeration if it < cfg.exaggeration_iters else 1.0
        momentum = 0.5 if it < cfg.exaggeration_iters else 0.8
        _kl_grad_kernel(P * exag if exag != 1.0 else P, Y, grad)
        same = np.sign(grad) == np.sign(update)
        gains = np.where(same, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        update = momentum * update - cfg.lr * gains * grad
        Y = Y + update
        if return_history:
            history.append(kl_divergence(P, Y))
    if not np.isfinite(Y).all():
        raise NumericError("t-SNE diverged")
    Y = Y - Y.mean(axis=0)
    return (Y, np.array(history)) if return_history else Y


def reduce_embedding(emb: EmbeddingMatrix, cfg: ReductionConfig) -> EmbeddingMatrix:
    cfg.validate()
    if cfg.method == "pca":
        Z = pca_fit_transform(emb.vectors, cfg.out_dim)
    else:
        Z = tsne(emb.vectors, cfg)
    meta = dict(emb.meta)
    meta["parent_method"] = emb.method
    return EmbeddingMatrix(emb.ids, Z, cfg.method, cfg.seed, meta)
