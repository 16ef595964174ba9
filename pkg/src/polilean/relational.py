"""Relational Embeddings: learn users from observed retweet pairs only.

A bilinear sigmoid model with an input table (retweeters) and an output table
(retweeted users) is trained to score each observed (source, target) pair
above ``negatives`` noise targets.  Unlike the walk methods no co-occurrence
is synthesised: every positive update is a pair from the input stream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sgns
from .embedding import EmbeddingMatrix
from .errors import ConfigError
from .graph import InteractionGraph
from .sgns import pair_loss, pair_loss_grad  # noqa: F401  re-exported
from .walks import config_hash


@dataclass
class RelationalConfig:
    dim: int = 20
    negatives: int = 5
    epochs: int = 50
    initial_lr: float = 0.025
    min_lr: float = 1e-4
    ns_power: float = 0.75
    share_tables: bool = False
    concat: bool = False
    dedup: bool = False
    seed: int = 0

    def validate(self) -> "RelationalConfig":
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.negatives < 1:
            raise ConfigError("negatives must be >= 1")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if not self.initial_lr > 0:
            raise ConfigError("initial_lr must be positive")
        if not 0 <= self.ns_power <= 1:
            raise ConfigError("ns_power must lie in [0, 1]")
        return self


def train_relational_tables(src, dst, n_users: int, cfg: RelationalConfig,
                            threads: int = 1, trace_size: int = 0):
    """Train on internal-index pairs; returns ``(w_in, w_out, trace)``.

    ``trace`` (when ``trace_size > 0``) records the first updates as rows
    ``(is_positive, input_row, output_row)`` for auditing.
    """
    cfg.validate()
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if len(src) == 0:
        raise ConfigError("relational training needs at least one pair")
    rng = np.random.default_rng(cfg.seed)
    w_in, w_out = sgns.init_tables(n_users, cfg.dim, rng)
    if cfg.share_tables:
        # one table for both roles: the kernel receives the same array twice
        w_out = w_in
    prob, alias = sgns.alias_table(sgns.noise_weights(np.bincount(dst, minlength=n_users), cfg.ns_power))
    total = len(src) * cfg.epochs
    trace = np.zeros((trace_size, 3), dtype=np.int64)
    pos = np.zeros(1, dtype=np.int64)
    if threads <= 1:
        done = 0
        for _ in range(cfg.epochs):
            order = rng.permutation(len(src))
            done = sgns.train_pair_kernel(src, dst, order, cfg.negatives, w_in, w_out, prob, alias,
                                          cfg.initial_lr, cfg.min_lr, total, done, rng, trace, pos)
    else:
        from concurrent.futures import ThreadPoolExecutor

        streams = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(threads)]
        counters = [0] * threads
        for _ in range(cfg.epochs):
            parts = np.array_split(rng.permutation(len(src)), threads)

            def run(t):
                tr, ps = sgns.no_trace()
                counters[t] = sgns.train_pair_kernel(src, dst, parts[t], cfg.negatives, w_in, w_out, prob,
                                                     alias, cfg.initial_lr, cfg.min_lr, total / threads,
                                                     counters[t], streams[t], tr, ps)

            with ThreadPoolExecutor(threads) as pool:
                list(pool.map(run, range(threads)))
    return w_in, w_out, trace[: pos[0]]


def user_vectors(w_in, w_out, src, dst, n_users: int, concat: bool = False):
    """Pick each user's representation; returns ``(rows, vectors)``.

    Sources use their input vector, target-only users their output vector.
    With ``concat`` every user gets ``[input, output]``.
    """
    is_src = np.zeros(n_users, bool)
    is_src[src] = True
    seen = is_src.copy()
    seen[dst] = True
    rows = np.flatnonzero(seen)
    if concat:
        return rows, np.hstack([w_in[rows], w_out[rows]])
    vec = np.where(is_src[rows, None], w_in[rows], w_out[rows])
    return rows, vec


def train_relational(pairs, cfg: RelationalConfig | None = None, threads: int = 1) -> EmbeddingMatrix:
    """Relational embeddings from a (source, target) stream or a graph.

    ``pairs`` may be an :class:`InteractionGraph` (pairs expanded by retweet
    count, self-retweets dropped) or any iterable of external-id pairs.
    """
    cfg = cfg or RelationalConfig()
    if isinstance(pairs, InteractionGraph):
        graph = pairs
        users = graph.users
        src, dst = graph.pair_arrays(dedup=cfg.dedup)
    else:
        arr = np.array(list(pairs), dtype=np.uint64).reshape(-1, 2)
        if cfg.dedup:
            arr = np.unique(arr, axis=0)
        users, inv = np.unique(arr.ravel(), return_inverse=True)
        inv = inv.reshape(-1, 2)
        src, dst = inv[:, 0], inv[:, 1]
    if len(src) == 0:
        raise ConfigError("relational training needs at least one pair")
    w_in, w_out, _ = train_relational_tables(src, dst, len(users), cfg, threads)
    rows, vec = user_vectors(w_in, w_out, src, dst, len(users), cfg.concat)
    return EmbeddingMatrix(users[rows], vec, "re", cfg.seed, {"config": config_hash(cfg)})
