"""DeepWalk and node2vec: biased random walks plus skip-gram training.

Walks run over the undirected view of the retweet graph, weighted by retweet
count unless ``binary_edges`` is set.  DeepWalk is the ``p = q = 1`` case of
the same engine.  Biased steps use rejection sampling against the maximum
bias, which samples the exact node2vec distribution without materialising
per-edge transition tables.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import sgns
from ._accel import kernel
from .embedding import EmbeddingMatrix
from .errors import ConfigError
from .graph import Adjacency, InteractionGraph

log = logging.getLogger(__name__)


@dataclass
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 80
    window: int = 10
    p: float = 1.0
    q: float = 1.0
    seed: int = 0
    binary_edges: bool = False

    def validate(self) -> "WalkConfig":
        if self.walks_per_node < 1:
            raise ConfigError("walks_per_node must be >= 1")
        if self.walk_length < 2:
            raise ConfigError("walk_length must be >= 2")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if not (self.p > 0 and self.q > 0):
            raise ConfigError("p and q must be positive")
        return self


@dataclass
class SkipGramConfig:
    dim: int = 20
    negatives: int = 5
    initial_lr: float = 0.025
    min_lr: float = 1e-4
    epochs: int = 1
    ns_power: float = 0.75
    seed: int = 0

    def validate(self) -> "SkipGramConfig":
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.negatives < 1:
            raise ConfigError("negatives must be >= 1")
        if not self.initial_lr > 0:
            raise ConfigError("initial_lr must be positive")
        if not 0 <= self.ns_power <= 1:
            raise ConfigError("ns_power must lie in [0, 1]")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        return self


@dataclass
class WalkCorpus:
    walks: np.ndarray  # (n_walks, walk_length), padded with -1
    lengths: np.ndarray
    n_nodes: int
    window: int = 10

    @property
    def counts(self) -> np.ndarray:
        mask = self.walks >= 0
        return np.bincount(self.walks[mask], minlength=self.n_nodes)

    @property
    def sequences(self) -> list[np.ndarray]:
        return [row[:n] for row, n in zip(self.walks, self.lengths)]

    def __len__(self) -> int:
        return len(self.walks)


def config_hash(*cfgs) -> str:
    blob = json.dumps([asdict(c) for c in cfgs], sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


# ----------------------------------------------------------------------
# transition weights


def transition_weights(adj: Adjacency, prev: int | None, cur: int, p: float, q: float):
    """Unnormalised node2vec step weights from ``cur`` given ``prev``.

    Returns ``(neighbours, weights)``.  With ``prev=None`` the weights are the
    plain edge weights.
    """
    nbrs = adj.neighbors(cur)
    w = adj.neighbor_weights(cur).copy()
    if prev is None:
        return nbrs, w
    prev_nbrs = adj.neighbors(prev)
    for k, x in enumerate(nbrs):
        if x == prev:
            w[k] /= p
        elif not np.isin(x, prev_nbrs):
            w[k] /= q
    return nbrs, w


@kernel
def _weighted_neighbor(indptr, indices, cumw, cur, rng):
    a = indptr[cur]
    b = indptr[cur + 1]
    u = rng.random() * cumw[b - 1]
    k = np.searchsorted(cumw[a:b], u, side="right")
    if k >= b - a:
        k = b - a - 1
    return indices[a + k]


@kernel
def _is_adjacent(indptr, indices, a, x):
    lo = indptr[a]
    hi = indptr[a + 1]
    k = np.searchsorted(indices[lo:hi], x)
    return k < hi - lo and indices[lo + k] == x


@kernel
def walk_kernel(indptr, indices, cumw, start, length, p, q, rng, out):
    """Write one walk from ``start`` into ``out``; returns its length."""
    out[0] = start
    if indptr[start + 1] == indptr[start]:
        return 1
    out[1] = _weighted_neighbor(indptr, indices, cumw, start, rng)
    unbiased = p == 1.0 and q == 1.0
    max_bias = max(1.0 / p, 1.0, 1.0 / q)
    for k in range(2, length):
        cur = out[k - 1]
        prev = out[k - 2]
        if unbiased:
            out[k] = _weighted_neighbor(indptr, indices, cumw, cur, rng)
            continue
        while True:
            x = _weighted_neighbor(indptr, indices, cumw, cur, rng)
            if x == prev:
                bias = 1.0 / p
            elif _is_adjacent(indptr, indices, prev, x):
                bias = 1.0
            else:
                bias = 1.0 / q
            if rng.random() * max_bias < bias:
                out[k] = x
                break
    return length


@kernel
def node_walks_kernel(indptr, indices, cumw, start, n_walks, length, p, q, rng, out, lengths):
    for r in range(n_walks):
        lengths[r] = walk_kernel(indptr, indices, cumw, start, length, p, q, rng, out[r])


def node_rng(seed: int, node: int) -> np.random.Generator:
    """Independent stream for walks starting at ``node``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(node),)))


def generate_walks(graph: InteractionGraph | Adjacency, cfg: WalkConfig, threads: int = 1) -> WalkCorpus:
    """``walks_per_node`` walks from every non-isolated node.

    Each start node draws from its own seeded stream, so the corpus does not
    depend on ``threads``.  Rows are ordered round by round, with the node
    order of each round shuffled from the master seed.
    """
    cfg.validate()
    adj = graph.undirected(binary=cfg.binary_edges) if isinstance(graph, InteractionGraph) else graph
    n = adj.n_nodes
    if n == 0:
        raise ConfigError("cannot walk an empty graph")
    starts = np.flatnonzero(adj.degree() > 0)
    R, L = cfg.walks_per_node, cfg.walk_length
    walks = np.full((len(starts), R, L), -1, dtype=np.int64)
    lengths = np.zeros((len(starts), R), dtype=np.int64)
    p, q = float(cfg.p), float(cfg.q)

    def run(block):
        for j in block:
            node_walks_kernel(adj.indptr, adj.indices, adj.cumweights, starts[j], R, L, p, q,
                              node_rng(cfg.seed, starts[j]), walks[j], lengths[j])

    blocks = np.array_split(np.arange(len(starts)), max(1, min(threads, len(starts))))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(run, blocks))
    else:
        for b in blocks:
            run(b)

    master = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(2**32,)))
    order = np.concatenate([master.permutation(len(starts)) for _ in range(R)]) if len(starts) else np.zeros(0, int)
    rounds = np.repeat(np.arange(R), len(starts))
    return WalkCorpus(walks[order, rounds], lengths[order, rounds], n, cfg.window)


# ----------------------------------------------------------------------
# skip-gram


def train_skipgram(corpus: WalkCorpus, cfg: SkipGramConfig, threads: int = 1,
                   return_tables: bool = False):
    """Skip-gram with negative sampling over a walk corpus.

    Returns the input-side table (``n_nodes x dim``).  With ``threads > 1``
    the corpus is split across threads that update shared tables without
    locks; results are then not bit-reproducible.
    """
    cfg.validate()
    if len(corpus) == 0 or corpus.lengths.sum() == 0:
        raise ConfigError("empty walk corpus")
    rng = np.random.default_rng(cfg.seed)
    w_in, w_out = sgns.init_tables(corpus.n_nodes, cfg.dim, rng)
    prob, alias = sgns.alias_table(sgns.noise_weights(corpus.counts, cfg.ns_power))
    tokens = int(corpus.lengths.sum())
    total = tokens * cfg.epochs
    trace, pos = sgns.no_trace()
    if threads <= 1:
        done = 0
        for _ in range(cfg.epochs):
            done = sgns.train_walk_kernel(corpus.walks, corpus.lengths, corpus.window, cfg.negatives,
                                          w_in, w_out, prob, alias, cfg.initial_lr, cfg.min_lr,
                                          total, done, rng, trace, pos)
    else:
        parts = np.array_split(np.arange(len(corpus)), threads)
        streams = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(threads)]

        def run(t):
            rows = parts[t]
            local_total = max(1, int(corpus.lengths[rows].sum()) * cfg.epochs)
            tr, ps = sgns.no_trace()
            done = 0
            for _ in range(cfg.epochs):
                done = sgns.train_walk_kernel(corpus.walks[rows], corpus.lengths[rows], corpus.window,
                                              cfg.negatives, w_in, w_out, prob, alias, cfg.initial_lr,
                                              cfg.min_lr, local_total, done, streams[t], tr, ps)

        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(run, range(threads)))
    if return_tables:
        return w_in, w_out
    return w_in


def embed_walks(graph: InteractionGraph, walk_cfg: WalkConfig, sg_cfg: SkipGramConfig,
                method: str, threads: int = 1) -> EmbeddingMatrix:
    """Walk corpus plus skip-gram; covers users that appear in some walk."""
    corpus = generate_walks(graph, walk_cfg, threads=threads)
    log.info("%s: %d walks, %d tokens", method, len(corpus), int(corpus.lengths.sum()))
    w_in = train_skipgram(corpus, sg_cfg, threads=threads)
    seen = np.flatnonzero(corpus.counts > 0)
    return EmbeddingMatrix(graph.users[seen], w_in[seen], method, sg_cfg.seed,
                           {"config": config_hash(walk_cfg, sg_cfg)})


def deepwalk(graph: InteractionGraph, walk_cfg: WalkConfig | None = None,
             sg_cfg: SkipGramConfig | None = None, threads: int = 1) -> EmbeddingMatrix:
    walk_cfg = dataclasses.replace(walk_cfg or WalkConfig(), p=1.0, q=1.0)
    return embed_walks(graph, walk_cfg, sg_cfg or SkipGramConfig(), "deepwalk", threads)


def node2vec(graph: InteractionGraph, walk_cfg: WalkConfig | None = None,
             sg_cfg: SkipGramConfig | None = None, threads: int = 1) -> EmbeddingMatrix:
    walk_cfg = walk_cfg or WalkConfig(p=1.0, q=0.5)
    # unbiased walks are DeepWalk; tag them so the two routes give identical files
    method = "deepwalk" if walk_cfg.p == 1.0 and walk_cfg.q == 1.0 else "node2vec"
    return embed_walks(graph, walk_cfg, sg_cfg or SkipGramConfig(), method, threads)
