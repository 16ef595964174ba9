"""Sigmoid objective with negative sampling, shared by skip-gram and RE.

The per-pair objective for an input vector ``u``, a positive output vector
``v`` and negative output vectors ``v'`` is

    loss = -log sigmoid(u.v) - sum log sigmoid(-u.v')

Training kernels apply one stochastic gradient step of this loss per observed
pair, word2vec style: the input row is updated once with the accumulated
gradient after all output rows have moved.
"""
from __future__ import annotations

import numpy as np

from ._accel import kernel
from .errors import ConfigError

CLAMP = 30.0


def sigmoid(x):
    x = np.clip(x, -CLAMP, CLAMP)
    return 1.0 / (1.0 + np.exp(-x))


def _log_sigmoid(x):
    # log sigmoid(x) = -log1p(exp(-x)), evaluated on the clamped argument
    x = np.clip(x, -CLAMP, CLAMP)
    return -np.log1p(np.exp(-x))


def _check_dims(u, v, negs):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    negs = np.asarray(negs, dtype=np.float64).reshape(-1, u.shape[-1]) if np.size(negs) else np.zeros((0, u.shape[-1]))
    if u.ndim != 1 or v.shape != u.shape or negs.shape[1] != u.shape[0]:
        raise ValueError(f"dimension mismatch: u{u.shape} v{v.shape} negs{np.shape(negs)}")
    return u, v, negs


def pair_loss(u, v, negs) -> float:
    """Negative-sampling loss of one (input, positive, negatives) triple."""
    if np.size(negs) and np.shape(negs)[-1] != np.shape(u)[-1]:
        raise ValueError("dimension mismatch between u and negatives")
    u, v, negs = _check_dims(u, v, negs)
    return float(-_log_sigmoid(u @ v) - _log_sigmoid(-(negs @ u)).sum())


def pair_loss_grad(u, v, negs):
    """Gradients of :func:`pair_loss` w.r.t. ``u``, ``v`` and each negative."""
    u, v, negs = _check_dims(u, v, negs)
    gp = sigmoid(u @ v) - 1.0
    gn = sigmoid(negs @ u)
    du = gp * v + gn @ negs
    dv = gp * u
    dnegs = gn[:, None] * u[None, :]
    return du, dv, dnegs


def batch_loss(w_in, w_out, inputs, positives, negatives) -> float:
    """Mean :func:`pair_loss` over a frozen batch (``negatives`` is m x k)."""
    u = w_in[inputs]
    pos = np.einsum("ij,ij->i", u, w_out[positives])
    neg = np.einsum("ij,ikj->ik", u, w_out[negatives])
    return float(np.mean(-_log_sigmoid(pos) - _log_sigmoid(-neg).sum(axis=1)))


# ----------------------------------------------------------------------
# noise distribution


def alias_table(weights):
    """Vose alias table for sampling proportional to ``weights``."""
    w = np.asarray(weights, dtype=np.float64)
    n = len(w)
    if n == 0 or w.sum() <= 0:
        raise ConfigError("noise distribution needs positive total weight")
    scaled = w * n / w.sum()
    prob = np.ones(n)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s, g = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = scaled[g] + scaled[s] - 1.0
        (small if scaled[g] < 1.0 else large).append(g)
    for i in small + large:
        prob[i] = 1.0
    return prob, alias


def alias_probabilities(prob, alias) -> np.ndarray:
    """Exact sampling distribution encoded by an alias table."""
    n = len(prob)
    out = prob / n
    np.add.at(out, alias, (1.0 - prob) / n)
    return out


def noise_weights(counts, power: float = 0.75) -> np.ndarray:
    """Unigram counts raised to ``power``; zero counts stay zero."""
    c = np.asarray(counts, dtype=np.float64)
    return np.where(c > 0, c, 0.0) ** power * (c > 0)


@kernel
def alias_draw(prob, alias, rng):
    i = int(rng.random() * prob.shape[0])
    if i >= prob.shape[0]:
        i = prob.shape[0] - 1
    if rng.random() < prob[i]:
        return i
    return alias[i]


# ----------------------------------------------------------------------
# kernels


@kernel
def _sig(x):
    if x > 30.0:
        x = 30.0
    elif x < -30.0:
        x = -30.0
    return 1.0 / (1.0 + np.exp(-x))


@kernel
def sgns_update(w_in, w_out, c, o, negatives, prob, alias, lr, rng, neu, trace, trace_pos):
    """One positive plus ``negatives`` sampled updates for input ``c``, target ``o``."""
    dim = w_in.shape[1]
    for k in range(dim):
        neu[k] = 0.0
    for d in range(negatives + 1):
        if d == 0:
            t = o
            label = 1.0
        else:
            t = alias_draw(prob, alias, rng)
            if t == o:
                continue
            label = 0.0
        if trace.shape[0] > 0 and trace_pos[0] < trace.shape[0]:
            p = trace_pos[0]
            trace[p, 0] = 1 if d == 0 else 0
            trace[p, 1] = c
            trace[p, 2] = t
            trace_pos[0] = p + 1
        f = 0.0
        for k in range(dim):
            f += w_in[c, k] * w_out[t, k]
        g = (label - _sig(f)) * lr
        for k in range(dim):
            neu[k] += g * w_out[t, k]
            w_out[t, k] += g * w_in[c, k]
    for k in range(dim):
        w_in[c, k] += neu[k]


@kernel
def train_walk_kernel(walks, lengths, window, negatives, w_in, w_out, prob, alias,
                      lr0, lr_min, total_tokens, offset, rng, trace, trace_pos):
    """Skip-gram over walk rows; returns the updated token counter."""
    neu = np.zeros(w_in.shape[1])
    done = offset
    for r in range(walks.shape[0]):
        n = lengths[r]
        for i in range(n):
            lr = lr0 - (lr0 - lr_min) * done / total_tokens
            if lr < lr_min:
                lr = lr_min
            c = walks[r, i]
            lo = i - window
            if lo < 0:
                lo = 0
            hi = i + window + 1
            if hi > n:
                hi = n
            for j in range(lo, hi):
                if j != i:
                    sgns_update(w_in, w_out, c, walks[r, j], negatives, prob, alias, lr, rng, neu, trace, trace_pos)
            done += 1
    return done


@kernel
def train_pair_kernel(src, dst, order, negatives, w_in, w_out, prob, alias,
                      lr0, lr_min, total, offset, rng, trace, trace_pos):
    """One pass over (src, dst) pairs in ``order``; returns the pair counter."""
    neu = np.zeros(w_in.shape[1])
    done = offset
    for m in range(order.shape[0]):
        i = order[m]
        lr = lr0 - (lr0 - lr_min) * done / total
        if lr < lr_min:
            lr = lr_min
        sgns_update(w_in, w_out, src[i], dst[i], negatives, prob, alias, lr, rng, neu, trace, trace_pos)
        done += 1
    return done


def no_trace():
    return np.zeros((0, 3), dtype=np.int64), np.zeros(1, dtype=np.int64)


def init_tables(n: int, dim: int, rng: np.random.Generator):
    w_in = (rng.random((n, dim)) - 0.5) / dim
    w_out = np.zeros((n, dim))
    return w_in, w_out
