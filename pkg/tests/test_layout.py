import math

import numpy as np
import pytest

from conftest import two_cliques
from polilean.errors import ConfigError
from polilean.graph import InteractionGraph
from polilean.layout import (
    Fa2Config, Fa2State, _prepare, fa2_layout, fa2_positions, fa2_step, initial_positions, jitter_coincident,
    repulsion_barnes_hut, repulsion_exact,
)


def dist(p, a, b):
    return float(np.linalg.norm(p[a] - p[b]))


def test_disconnected_pair_moves_apart():
    g = InteractionGraph.from_pairs([0, 1], [0, 1])  # two users, self-loops only
    adj = g.undirected()
    cfg = Fa2Config(gravity=0.0)
    pos, state = initial_positions(2, 0), Fa2State()
    d = [dist(pos, 0, 1)]
    for step in range(50):
        pos = fa2_step(adj, pos, cfg, step, state)
        d.append(dist(pos, 0, 1))
    assert all(b > a for a, b in zip(d, d[1:]))


def test_linked_pair_reaches_force_balance():
    adj = InteractionGraph.from_pairs([0], [1]).undirected()
    cfg = Fa2Config(gravity=0.0, iterations=1)
    pos, state = initial_positions(2, 3), Fa2State()
    d = []
    for step in range(2000):
        pos = fa2_step(adj, pos, cfg, step, state)
        d.append(dist(pos, 0, 1))
    assert abs(d[-1] - d[-2]) < 1e-3
    # attraction d equals repulsion k_r (deg+1)^2 / d
    assert d[-1] == pytest.approx(math.sqrt(cfg.scaling * 4), rel=1e-3)


def test_planted_communities_separate():
    g = two_cliques(10)
    pos = fa2_layout(g, Fa2Config(seed=1))
    idx = g.index_of(pos.ids)
    P = pos.vectors
    side = idx >= 10
    D = np.linalg.norm(P[:, None] - P[None, :], axis=-1)
    same = side[:, None] == side[None, :]
    off = ~np.eye(len(P), dtype=bool)
    assert D[~same].mean() > 2 * D[same & off].mean()


def test_star_leaves_equidistant():
    g = InteractionGraph.from_pairs([0] * 8, list(range(1, 9)))
    emb = fa2_layout(g, Fa2Config(seed=2))
    c = emb.lookup([0])[0]
    r = np.linalg.norm(emb.lookup(list(range(1, 9))) - c, axis=1)
    assert r.max() / r.min() < 1.10


def test_single_node_stays_put():
    g = InteractionGraph.from_pairs([5], [5])
    emb = fa2_layout(g, Fa2Config(gravity=0.0, iterations=20, seed=4))
    np.testing.assert_array_equal(emb.vectors, initial_positions(1, 4))


def test_exact_mode_deterministic():
    g = two_cliques(6)
    a = fa2_layout(g, Fa2Config(iterations=200, seed=9))
    b = fa2_layout(g, Fa2Config(iterations=200, seed=9))
    assert a.vectors.tobytes() == b.vectors.tobytes()
    assert a.method == "fa2" and a.dim == 2


def test_repulsion_has_no_net_momentum(rng):
    pos = rng.normal(size=(50, 2))
    mass = rng.integers(1, 6, 50).astype(float)
    force = np.zeros((50, 2))
    repulsion_exact(pos, mass, 2.0, force)
    assert np.abs(force.sum(0)).max() < 1e-9 * np.abs(force).sum()


def test_barnes_hut_close_to_exact(rng):
    pos = rng.normal(size=(400, 2))
    mass = rng.integers(1, 5, 400).astype(float)
    exact, approx = np.zeros((400, 2)), np.zeros((400, 2))
    repulsion_exact(pos, mass, 2.0, exact)
    repulsion_barnes_hut(pos, mass, 2.0, 0.5, approx)
    err = np.linalg.norm(exact - approx, axis=1) / np.linalg.norm(exact, axis=1)
    assert np.median(err) < 0.02
    zero = np.zeros((400, 2))
    repulsion_barnes_hut(pos, mass, 2.0, 0.0, zero)
    np.testing.assert_allclose(zero, exact, rtol=1e-9, atol=1e-9)


def test_barnes_hut_layout_keeps_structure():
    g = two_cliques(10)
    pos = fa2_layout(g, Fa2Config(barnes_hut_min_nodes=0, seed=1)).vectors
    side = g.index_of(fa2_layout(g, Fa2Config(iterations=1)).ids) >= 10
    inter = np.linalg.norm(pos[side].mean(0) - pos[~side].mean(0))
    assert inter > 1.0


def test_coincident_points_get_jittered():
    pos = np.zeros((3, 2))
    moved = jitter_coincident(pos, np.random.default_rng(0))
    assert moved == 2
    assert len({tuple(p) for p in pos}) == 3
    adj = InteractionGraph.from_pairs([0, 1], [1, 2]).undirected()
    out = fa2_step(adj, np.zeros((3, 2)), Fa2Config(), 0)
    assert np.isfinite(out).all()


def test_unweighted_edges_ignore_counts():
    adj = InteractionGraph.from_pairs([0, 1], [1, 2], [7, 1]).undirected()
    assert _prepare(adj, True).ew.tolist() == [7.0, 1.0]
    assert _prepare(adj, False).ew.tolist() == [1.0, 1.0]


def test_config_validation():
    for bad in (dict(iterations=0), dict(scaling=0.0), dict(gravity=-1.0), dict(barnes_hut_theta=2.0),
                dict(prevent_overlap=True)):
        with pytest.raises(ConfigError):
            Fa2Config(**bad).validate()
    with pytest.raises(ConfigError):
        fa2_positions(InteractionGraph.from_pairs([], []).undirected(), Fa2Config())
