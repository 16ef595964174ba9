"""ForceAtlas2 layout: 2-D user positions from the retweet graph.

Forces follow the Gephi implementation: linear attraction ``d * w`` along
edges, degree-weighted repulsion ``k_r (deg_u + 1)(deg_v + 1) / d`` between
all pairs (optionally through a Barnes-Hut quadtree), constant gravity towards
the origin and the adaptive global speed with per-node swinging damping.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import kernel
from .embedding import EmbeddingMatrix
from .errors import ConfigError, NumericError
from .graph import Adjacency, InteractionGraph

_COINCIDENT = 1e-9


@dataclass
class Fa2Config:
    iterations: int = 1000
    scaling: float = 2.0
    gravity: float = 1.0
    linlog: bool = False
    prevent_overlap: bool = False
    barnes_hut_theta: float = 1.2
    barnes_hut_min_nodes: int = 2000
    tolerance: float = 1.0
    weighted: bool = True
    seed: int = 0

    def validate(self) -> "Fa2Config":
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if not self.scaling > 0:
            raise ConfigError("scaling must be positive")
        if self.gravity < 0:
            raise ConfigError("gravity must be non-negative")
        if not 0 <= self.barnes_hut_theta <= 1.5:
            raise ConfigError("barnes_hut_theta must lie in [0, 1.5]")
        if self.prevent_overlap:
            raise ConfigError("prevent_overlap is not supported; nodes have no size")
        return self

    def use_barnes_hut(self, n: int) -> bool:
        return self.barnes_hut_theta > 0 and n > self.barnes_hut_min_nodes


@dataclass
class Fa2State:
    speed: float = 1.0
    speed_efficiency: float = 1.0
    old_force: np.ndarray | None = None
    history: list = field(default_factory=list)


# ----------------------------------------------------------------------
# repulsion


def _repulsion_numpy(pos, mass, kr, force):
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = (diff**2).sum(-1)
    np.fill_diagonal(d2, np.inf)
    d2[d2 < _COINCIDENT**2] = np.inf
    factor = kr * mass[:, None] * mass[None, :] / d2
    force += (diff * factor[..., None]).sum(axis=1)


@kernel(fallback=_repulsion_numpy)
def repulsion_exact(pos, mass, kr, force):
    n = pos.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            d2 = dx * dx + dy * dy
            if d2 < _COINCIDENT * _COINCIDENT:
                continue
            f = kr * mass[i] * mass[j] / d2
            force[i, 0] += dx * f
            force[i, 1] += dy * f
            force[j, 0] -= dx * f
            force[j, 1] -= dy * f


@kernel
def _build_quadtree(pos, mass):
    """Quadtree over points; cells are index ranges into ``perm``."""
    n = pos.shape[0]
    cap = 8 * n + 8
    start = np.zeros(cap, np.int64)
    end = np.zeros(cap, np.int64)
    child = np.full(cap, -1, np.int64)  # first of four consecutive children
    cx = np.zeros(cap)
    cy = np.zeros(cap)
    half = np.zeros(cap)
    cmass = np.zeros(cap)
    comx = np.zeros(cap)
    comy = np.zeros(cap)
    perm = np.arange(n)
    tmp = np.empty(n, np.int64)
    xmin = pos[:, 0].min()
    xmax = pos[:, 0].max()
    ymin = pos[:, 1].min()
    ymax = pos[:, 1].max()
    h = max(xmax - xmin, ymax - ymin) / 2.0 + 1e-12
    cx[0] = (xmin + xmax) / 2.0
    cy[0] = (ymin + ymax) / 2.0
    half[0] = h
    start[0] = 0
    end[0] = n
    ncell = 1
    stack = np.empty(cap, np.int64)
    depth = np.zeros(cap, np.int64)
    top = 0
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        c = stack[top]
        m = 0.0
        mx = 0.0
        my = 0.0
        for k in range(start[c], end[c]):
            b = perm[k]
            m += mass[b]
            mx += mass[b] * pos[b, 0]
            my += mass[b] * pos[b, 1]
        cmass[c] = m
        if m > 0:
            comx[c] = mx / m
            comy[c] = my / m
        cnt = end[c] - start[c]
        if cnt <= 1 or depth[c] >= 48 or ncell + 4 > cap:
            continue
        counts = np.zeros(4, np.int64)
        for k in range(start[c], end[c]):
            b = perm[k]
            qd = (1 if pos[b, 0] >= cx[c] else 0) + (2 if pos[b, 1] >= cy[c] else 0)
            counts[qd] += 1
        offs = np.zeros(4, np.int64)
        acc = start[c]
        for qd in range(4):
            offs[qd] = acc
            acc += counts[qd]
        fill = offs.copy()
        for k in range(start[c], end[c]):
            b = perm[k]
            qd = (1 if pos[b, 0] >= cx[c] else 0) + (2 if pos[b, 1] >= cy[c] else 0)
            tmp[fill[qd]] = b
            fill[qd] += 1
        for k in range(start[c], end[c]):
            perm[k] = tmp[k]
        child[c] = ncell
        hh = half[c] / 2.0
        for qd in range(4):
            cc = ncell + qd
            start[cc] = offs[qd]
            end[cc] = offs[qd] + counts[qd]
            half[cc] = hh
            cx[cc] = cx[c] + (hh if qd & 1 else -hh)
            cy[cc] = cy[c] + (hh if qd & 2 else -hh)
            depth[cc] = depth[c] + 1
            child[cc] = -1
            if counts[qd] > 0:
                stack[top] = cc
                top += 1
        ncell += 4
    where = np.empty(n, np.int64)
    for k in range(n):
        where[perm[k]] = k
    return start, end, child, half, cmass, comx, comy, perm, where


@kernel
def repulsion_barnes_hut(pos, mass, kr, theta, force):
    start, end, child, half, cmass, comx, comy, perm, where = _build_quadtree(pos, mass)
    n = pos.shape[0]
    stack = np.empty(4 * 64 + 8, np.int64)
    for i in range(n):
        wi = where[i]
        top = 1
        stack[0] = 0
        while top > 0:
            top -= 1
            c = stack[top]
            if end[c] == start[c]:
                continue
            contains = start[c] <= wi < end[c]
            if child[c] < 0:
                for k in range(start[c], end[c]):
                    j = perm[k]
                    if j == i:
                        continue
                    dx = pos[i, 0] - pos[j, 0]
                    dy = pos[i, 1] - pos[j, 1]
                    d2 = dx * dx + dy * dy
                    if d2 < _COINCIDENT * _COINCIDENT:
                        continue
                    f = kr * mass[i] * mass[j] / d2
                    force[i, 0] += dx * f
                    force[i, 1] += dy * f
                continue
            dx = pos[i, 0] - comx[c]
            dy = pos[i, 1] - comy[c]
            d2 = dx * dx + dy * dy
            if not contains and d2 > 0 and (2.0 * half[c]) ** 2 < theta * theta * d2:
                f = kr * mass[i] * cmass[c] / d2
                force[i, 0] += dx * f
                force[i, 1] += dy * f
            else:
                for qd in range(4):
                    stack[top] = child[c] + qd
                    top += 1


# ----------------------------------------------------------------------
# attraction and gravity


def _attraction_numpy(pos, esrc, edst, ew, linlog, force):
    diff = pos[esrc] - pos[edst]
    if linlog:
        d = np.sqrt((diff**2).sum(1))
        scale = np.where(d > 0, np.log1p(d) / np.where(d > 0, d, 1.0), 0.0)
        diff = diff * scale[:, None]
    f = diff * ew[:, None]
    np.add.at(force, esrc, -f)
    np.add.at(force, edst, f)


@kernel(fallback=_attraction_numpy)
def attraction(pos, esrc, edst, ew, linlog, force):
    for e in range(esrc.shape[0]):
        a = esrc[e]
        b = edst[e]
        dx = pos[a, 0] - pos[b, 0]
        dy = pos[a, 1] - pos[b, 1]
        f = ew[e]
        if linlog:
            d = np.sqrt(dx * dx + dy * dy)
            if d > 0:
                f = f * np.log1p(d) / d
            else:
                f = 0.0
        force[a, 0] -= dx * f
        force[a, 1] -= dy * f
        force[b, 0] += dx * f
        force[b, 1] += dy * f


def gravity_force(pos, mass, g, force):
    d = np.sqrt((pos**2).sum(1))
    f = np.where(d > 0, g * mass / np.where(d > 0, d, 1.0), 0.0)
    force -= pos * f[:, None]


# ----------------------------------------------------------------------


@dataclass(frozen=True)
class _Prepared:
    mass: np.ndarray
    esrc: np.ndarray
    edst: np.ndarray
    ew: np.ndarray


def _prepare(adj: Adjacency, weighted: bool) -> _Prepared:
    rows = np.repeat(np.arange(adj.n_nodes), adj.degree())
    upper = rows < adj.indices
    w = adj.weights[upper] if weighted else np.ones(upper.sum())
    return _Prepared(adj.degree().astype(np.float64) + 1.0, rows[upper], adj.indices[upper], w)


def jitter_coincident(pos, rng: np.random.Generator) -> int:
    """Nudge points lying within 1e-9 of a lexicographic neighbour."""
    order = np.lexsort((pos[:, 1], pos[:, 0]))
    gaps = np.abs(np.diff(pos[order], axis=0)).max(axis=1) if len(pos) > 1 else np.zeros(0)
    dup = order[1:][gaps < _COINCIDENT]
    if len(dup):
        pos[dup] += rng.uniform(-1e-6, 1e-6, size=(len(dup), 2))
    return len(dup)


def fa2_step(adj: Adjacency, pos: np.ndarray, cfg: Fa2Config, step_index: int,
             state: Fa2State | None = None, prep: _Prepared | None = None) -> np.ndarray:
    """Advance the layout one iteration; returns new positions.

    ``state`` carries the adaptive speed and last forces between calls.
    """
    state = state if state is not None else Fa2State()
    prep = prep or _prepare(adj, cfg.weighted)
    pos = np.array(pos, dtype=np.float64, copy=True)
    n = len(pos)
    jitter_coincident(pos, np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(step_index,))))
    force = np.zeros((n, 2))
    if cfg.use_barnes_hut(n):
        repulsion_barnes_hut(pos, prep.mass, cfg.scaling, cfg.barnes_hut_theta, force)
    else:
        repulsion_exact(pos, prep.mass, cfg.scaling, force)
    if cfg.gravity > 0:
        gravity_force(pos, prep.mass, cfg.gravity, force)
    attraction(pos, prep.esrc, prep.edst, prep.ew, cfg.linlog, force)

    old = state.old_force if state.old_force is not None else np.zeros_like(force)
    mass = prep.mass
    swing_i = np.sqrt(((old - force) ** 2).sum(1))
    swinging = float((mass * swing_i).sum())
    traction = float((0.5 * mass * np.sqrt(((old + force) ** 2).sum(1))).sum())

    if swinging > 0 and traction > 0:
        est_jt = 0.05 * np.sqrt(n)
        jt = cfg.tolerance * max(np.sqrt(est_jt), min(10.0, est_jt * traction / (n * n)))
        if swinging / traction > 2.0:
            if state.speed_efficiency > 0.05:
                state.speed_efficiency *= 0.5
            jt = max(jt, cfg.tolerance)
        target = jt * state.speed_efficiency * traction / swinging
        if swinging > jt * traction:
            if state.speed_efficiency > 0.05:
                state.speed_efficiency *= 0.7
        elif state.speed < 1000:
            state.speed_efficiency *= 1.3
        state.speed = state.speed + min(target - state.speed, 0.5 * state.speed)

    factor = state.speed / (1.0 + np.sqrt(state.speed * mass * swing_i))
    pos += force * factor[:, None]
    state.old_force = force
    if not np.isfinite(pos).all():
        raise NumericError(f"ForceAtlas2 produced non-finite positions at step {step_index}")
    return pos


def initial_positions(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, 2))


def fa2_positions(adj: Adjacency, cfg: Fa2Config, pos: np.ndarray | None = None,
                  state: Fa2State | None = None) -> np.ndarray:
    cfg.validate()
    if adj.n_nodes == 0:
        raise ConfigError("cannot lay out an empty graph")
    pos = initial_positions(adj.n_nodes, cfg.seed) if pos is None else np.asarray(pos, dtype=np.float64)
    state = state or Fa2State()
    prep = _prepare(adj, cfg.weighted)
    for step in range(cfg.iterations):
        pos = fa2_step(adj, pos, cfg, step, state, prep)
    return pos


def fa2_layout(graph: InteractionGraph, cfg: Fa2Config | None = None) -> EmbeddingMatrix:
    """2-D ForceAtlas2 coordinates for every user, as a ``fa2`` embedding."""
    cfg = cfg or Fa2Config()
    pos = fa2_positions(graph.undirected(), cfg)
    return EmbeddingMatrix(graph.users, pos, "fa2", cfg.seed)
