"""Seeded tiered multi-party retweet graphs with ground-truth labels.

Every user (labelled or not) belongs to one party.  A user's retweets stay
inside its party with probability ``1 - mu[tier]``; in-party targets are drawn
in proportion to a hub weight (members weigh ``1 + hub_bias``, everyone else
1).  Otherwise the target is a uniformly drawn user of a uniformly drawn
other party, so the cross-party fraction of a tier's retweets is ``mu[tier]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .graph import DEFAULT_COLORS, InteractionGraph, Label, LabelSet, Tier

TIERS = (Tier.MEMBER, Tier.SUPPORTER, Tier.SYMPATHIZER)
INTERACTING = 3  # tier code for unlabelled users
ACTIVITY_KEYS = ("member", "supporter", "sympathizer", "interacting")


@dataclass
class RegionSpec:
    name: str
    parties: list[str]
    colors: list[str] = field(default_factory=list)
    members_per_party: int = 40
    supporters_per_party: int = 90
    sympathizers_per_party: int = 85
    interacting_users: int = 5000

    @property
    def k(self) -> int:
        return len(self.parties)


@dataclass
class SynthConfig:
    regions: list[RegionSpec]
    mixing: dict[str, float] = field(default_factory=lambda: {"member": 0.05, "supporter": 0.15, "sympathizer": 0.35})
    interacting_mixing: float | None = None  # None: sympathizer level
    retweets_per_user: float = 33.0
    activity_sigma: float = 1.0
    # per-tier multiplier on mean activity; missing tiers use 1
    activity_scale: dict[str, float] = field(default_factory=dict)
    hub_bias: float = 20.0
    seed: int = 42

    def mu(self, tier: int) -> float:
        if tier == INTERACTING:
            return self.mixing["sympathizer"] if self.interacting_mixing is None else self.interacting_mixing
        return self.mixing[TIERS[tier].value]

    def validate(self) -> "SynthConfig":
        if not self.regions:
            raise ConfigError("synthetic config needs at least one region")
        for r in self.regions:
            if r.k < 2:
                raise ConfigError(f"region {r.name}: need at least 2 parties")
            if len(set(r.parties)) != r.k:
                raise ConfigError(f"region {r.name}: duplicate party names")
            if min(r.members_per_party, r.supporters_per_party, r.sympathizers_per_party) < 1:
                raise ConfigError(f"region {r.name}: tier sizes must be >= 1")
            if r.interacting_users < 0:
                raise ConfigError(f"region {r.name}: interacting_users must be >= 0")
        for t in TIERS:
            if t.value not in self.mixing:
                raise ConfigError(f"mixing for tier {t.value!r} missing")
        for tier in range(4):
            if not 0.0 <= self.mu(tier) <= 1.0:
                raise ConfigError("mixing values must lie in [0, 1]")
        for name, v in self.activity_scale.items():
            if name not in ACTIVITY_KEYS or not v > 0:
                raise ConfigError(f"activity_scale: bad entry {name}={v}")
        if not self.retweets_per_user > 0 or self.activity_sigma < 0 or self.hub_bias < 0:
            raise ConfigError("retweets_per_user > 0, activity_sigma >= 0 and hub_bias >= 0 required")
        return self


UK_PARTIES = {
    "SCT": [("SNP", "#fdd835"), ("SCU", "#0087dc"), ("SL", "#e4003b"), ("SGP", "#00b140"), ("SLD", "#faa61a")],
    "WAL": [("WL", "#e4003b"), ("WC", "#0087dc"), ("PC", "#005b54"), ("WLD", "#faa61a")],
    "NIR": [("SF", "#326760"), ("DUP", "#d46a4c"), ("APNI", "#f6cb2f"), ("UUP", "#0087dc"), ("SDLP", "#2aa82c")],
}


def uk_like(seed: int = 42) -> SynthConfig:
    regions = [RegionSpec(name, [p for p, _ in parties], [c for _, c in parties])
               for name, parties in UK_PARTIES.items()]
    # less engaged tiers retweet less; base mean keeps ~200k retweets per region
    return SynthConfig(regions, retweets_per_user=37.0,
                       activity_scale={"supporter": 0.3, "sympathizer": 0.1}, seed=seed)


PRESETS = {"uk-like": uk_like}


@dataclass
class SynthRegion:
    name: str
    graph: InteractionGraph
    labels: LabelSet
    party: np.ndarray  # per graph user index, hidden party for every user
    tier: np.ndarray  # per graph user index, 0..2 tiers, 3 interacting

    def __iter__(self):
        yield self.graph
        yield self.labels

    def cross_party_counts(self) -> dict[str, tuple[int, int]]:
        """Per source tier: (cross-party retweets, all retweets)."""
        g = self.graph
        cross = self.party[g.src] != self.party[g.dst]
        out = {}
        for code, name in enumerate([t.value for t in TIERS] + ["interacting"]):
            sel = self.tier[g.src] == code
            out[name] = (int(g.count[sel & cross].sum()), int(g.count[sel].sum()))
        return out


def _activity(rng, n, mean, sigma):
    mean = np.broadcast_to(np.asarray(mean, dtype=np.float64), (n,))
    if sigma == 0:
        return np.maximum(1, np.rint(mean)).astype(np.int64)
    draws = rng.lognormal(np.log(mean) - 0.5 * sigma**2, sigma, n)
    return np.maximum(1, np.rint(draws)).astype(np.int64)


def generate_region(spec: RegionSpec, cfg: SynthConfig, region_index: int = 0,
                    rng: np.random.Generator | None = None) -> SynthRegion:
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    K = spec.k
    sizes = [spec.members_per_party, spec.supporters_per_party, spec.sympathizers_per_party]
    party, tier = [], []
    for t, size in enumerate(sizes):
        for p in range(K):
            party += [p] * size
            tier += [t] * size
    party = np.array(party + list(rng.integers(0, K, spec.interacting_users)), dtype=np.int64)
    tier = np.array(tier + [INTERACTING] * spec.interacting_users, dtype=np.int64)
    n = len(party)

    # per-party pools; in-party draws are hub weighted, cross-party draws uniform
    weight = np.where(tier == 0, 1.0 + cfg.hub_bias, 1.0)
    pools = [np.flatnonzero(party == p) for p in range(K)]
    cums = [np.cumsum(weight[idx]) for idx in pools]

    scale = np.array([cfg.activity_scale.get(k, 1.0) for k in ACTIVITY_KEYS])[tier]
    acts = _activity(rng, n, cfg.retweets_per_user * scale, cfg.activity_sigma)
    src = np.repeat(np.arange(n), acts)
    mu = np.array([cfg.mu(t) for t in range(4)])[tier[src]]
    crossing = rng.random(len(src)) < mu
    dst = np.empty(len(src), dtype=np.int64)

    sp = party[src]
    for p in range(K):
        sel = np.flatnonzero(~crossing & (sp == p))
        pending = sel
        while len(pending):
            c = cums[p]
            draw = pools[p][np.searchsorted(c, rng.random(len(pending)) * c[-1], side="right")]
            dst[pending] = draw
            pending = pending[draw == src[pending]]
        sel = np.flatnonzero(crossing & (sp == p))
        other = (p + rng.integers(1, K, len(sel))) % K
        for q in range(K):
            s = sel[other == q]
            dst[s] = pools[q][rng.integers(0, len(pools[q]), len(s))]

    # shuffled external ids with a per-region offset
    base = (region_index + 1) * 1_000_000
    ext = base + rng.permutation(n).astype(np.uint64)
    graph = InteractionGraph.from_pairs(ext[src], ext[dst])
    sorter = np.argsort(ext)
    order = sorter[np.searchsorted(ext, graph.users, sorter=sorter)]

    colors = spec.colors or [None] * K
    catalog = {spec.name: [(name, colors[i] or DEFAULT_COLORS[i % len(DEFAULT_COLORS)])
                           for i, name in enumerate(spec.parties)]}
    assign = {int(ext[i]): Label(spec.name, spec.parties[party[i]], TIERS[tier[i]])
              for i in range(n) if tier[i] != INTERACTING}
    return SynthRegion(spec.name, graph, LabelSet(assign, catalog), party[order], tier[order])


def generate(cfg: SynthConfig) -> list[SynthRegion]:
    """One :class:`SynthRegion` per configured region; deterministic given the seed."""
    cfg.validate()
    streams = np.random.SeedSequence(cfg.seed).spawn(len(cfg.regions))
    return [generate_region(spec, cfg, i, np.random.default_rng(s))
            for i, (spec, s) in enumerate(zip(cfg.regions, streams))]
