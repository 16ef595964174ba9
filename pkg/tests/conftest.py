import numpy as np
import pytest

from polilean.graph import InteractionGraph


def two_cliques(k=4, bridge=True):
    """Two k-cliques (ids 0..k-1 and k..2k-1), optionally joined by one edge."""
    src, dst = [], []
    for base in (0, k):
        for a in range(k):
            for b in range(a + 1, k):
                src.append(base + a)
                dst.append(base + b)
    if bridge:
        src.append(0)
        dst.append(k)
    return InteractionGraph.from_pairs(src, dst)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def small_region(parties=("A", "B"), mixing=0.05, seed=7, members=30, supporters=30,
                 sympathizers=30, interacting=300, **kw):
    """A desk-sized synthetic region with one mixing level for all tiers."""
    from polilean import synth

    spec = synth.RegionSpec("R", list(parties), [], members, supporters, sympathizers, interacting)
    mix = {t.value: mixing for t in synth.TIERS}
    cfg = synth.SynthConfig([spec], mixing=mix, retweets_per_user=kw.pop("retweets_per_user", 20.0),
                            seed=seed, **kw)
    return synth.generate(cfg)[0]
