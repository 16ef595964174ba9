"""Retweet interaction graphs and labelled user tiers."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import DataError

_U64_MAX = 2**64 - 1


class Tier(str, enum.Enum):
    """Engagement tier of a labelled user.

    Supporters follow five or more members of a party, sympathizers two or
    fewer.  The thresholds are recorded here as documentation only; follower
    counts are never recomputed.
    """

    MEMBER = "member"
    SUPPORTER = "supporter"
    SYMPATHIZER = "sympathizer"

    @classmethod
    def parse(cls, text: str) -> "Tier":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(t.value for t in cls)
            raise DataError(f"unknown tier {text!r}; expected one of {valid}") from None


@dataclass(frozen=True)
class RetweetEdge:
    source: int
    target: int
    count: int = 1

    @property
    def is_self_retweet(self) -> bool:
        return self.source == self.target


@dataclass(frozen=True)
class Adjacency:
    """CSR neighbour lists with cumulative weights for O(log deg) sampling."""

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    cumweights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.indptr) - 1

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def neighbor_weights(self, i: int) -> np.ndarray:
        return self.weights[self.indptr[i] : self.indptr[i + 1]]

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def strength(self) -> np.ndarray:
        out = np.zeros(self.n_nodes)
        rows = np.repeat(np.arange(self.n_nodes), self.degree())
        np.add.at(out, rows, self.weights)
        return out


def _csr(rows: np.ndarray, cols: np.ndarray, w: np.ndarray, n: int) -> Adjacency:
    order = np.lexsort((cols, rows))
    rows, cols, w = rows[order], cols[order], w[order].astype(np.float64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    # cumulative weights restart at every row
    cum = np.cumsum(w)
    if len(w):
        row_base = np.repeat(np.concatenate(([0.0], cum))[indptr[:-1]], np.diff(indptr))
        cum = cum - row_base
    return Adjacency(indptr, cols.astype(np.int64), w, cum)


class InteractionGraph:
    """Directed retweet multigraph over dense user indices ``0..N-1``.

    ``users[i]`` is the external id of internal index ``i``; ids are sorted
    ascending.  Edges are aggregated per (source, target) with positive
    multiplicity.  Instances are immutable after construction.
    """

    def __init__(self, users, src, dst, count):
        self.users = np.asarray(users, dtype=np.uint64)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.count = np.asarray(count, dtype=np.int64)
        n = len(self.users)
        if len(self.src) and (self.count < 1).any():
            raise DataError("edge counts must be >= 1")
        self.out_adj = _csr(self.src, self.dst, self.count, n)
        self.in_adj = _csr(self.dst, self.src, self.count, n)
        for a in (self.users, self.src, self.dst, self.count):
            a.setflags(write=False)

    @classmethod
    def from_pairs(cls, sources, targets, counts=None) -> "InteractionGraph":
        """Build a graph from external-id pairs, summing duplicates."""
        s = np.asarray(sources, dtype=np.uint64)
        t = np.asarray(targets, dtype=np.uint64)
        c = np.ones(len(s), dtype=np.int64) if counts is None else np.asarray(counts, dtype=np.int64)
        if not (len(s) == len(t) == len(c)):
            raise DataError("source, target and count arrays differ in length")
        users, inv = np.unique(np.concatenate([s, t]), return_inverse=True)
        si, ti = inv[: len(s)], inv[len(s) :]
        if len(s) == 0:
            return cls(users, si, ti, c)
        key = si.astype(np.int64) * len(users) + ti
        ukey, kinv = np.unique(key, return_inverse=True)
        agg = np.bincount(kinv, weights=c).astype(np.int64)
        return cls(users, ukey // len(users), ukey % len(users), agg)

    # ------------------------------------------------------------------
    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @property
    def total_retweets(self) -> int:
        return int(self.count.sum())

    def stats(self) -> tuple[int, int, int]:
        return self.n_users, self.n_edges, self.total_retweets

    def index_of(self, ids) -> np.ndarray:
        """Internal indices for external ids; -1 where an id is unknown."""
        ids = np.asarray(ids, dtype=np.uint64)
        pos = np.searchsorted(self.users, ids)
        pos = np.clip(pos, 0, max(len(self.users) - 1, 0))
        ok = len(self.users) > 0
        found = (self.users[pos] == ids) if ok else np.zeros(len(ids), bool)
        return np.where(found, pos, -1)

    def edges(self) -> Iterator[RetweetEdge]:
        for s, t, c in zip(self.src, self.dst, self.count):
            yield RetweetEdge(int(self.users[s]), int(self.users[t]), int(c))

    def self_loops(self) -> np.ndarray:
        return self.src == self.dst

    def undirected(self, binary: bool = False, drop_self_loops: bool = True) -> Adjacency:
        """Symmetrised adjacency with weight = retweet count in both directions."""
        keep = ~self.self_loops() if drop_self_loops else np.ones(self.n_edges, bool)
        s, t = self.src[keep], self.dst[keep]
        w = np.ones(len(s)) if binary else self.count[keep].astype(np.float64)
        rows = np.concatenate([s, t])
        cols = np.concatenate([t, s])
        ww = np.concatenate([w, w])
        n = self.n_users
        if len(rows):
            key = rows * n + cols
            ukey, inv = np.unique(key, return_inverse=True)
            agg = np.bincount(inv, weights=ww)
            if binary:
                agg = np.ones_like(agg)
            rows, cols, ww = ukey // n, ukey % n, agg
        return _csr(rows, cols, ww, n)

    def pair_arrays(self, dedup: bool = False, drop_self_loops: bool = True):
        """Internal (source, target) index arrays, one row per retweet."""
        keep = ~self.self_loops() if drop_self_loops else np.ones(self.n_edges, bool)
        reps = np.ones(keep.sum(), dtype=np.int64) if dedup else self.count[keep]
        return np.repeat(self.src[keep], reps), np.repeat(self.dst[keep], reps)

    def __repr__(self) -> str:
        return f"InteractionGraph(users={self.n_users}, edges={self.n_edges}, retweets={self.total_retweets})"


def edge_pairs(graph: InteractionGraph, dedup: bool = False) -> Iterator[tuple[int, int]]:
    """Yield external (source, target) pairs, each edge ``count`` times."""
    for e in graph.edges():
        for _ in range(1 if dedup else e.count):
            yield e.source, e.target


def _parse_id(tok: str, lineno: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise DataError(f"line {lineno}: user id {tok!r} is not an integer") from None
    if not 0 <= v <= _U64_MAX:
        raise DataError(f"line {lineno}: user id {tok} outside unsigned 64-bit range")
    return v


EDGE_FORMATS = ("auto", "pairs", "weighted")


def parse_edges(lines, fmt: str = "auto") -> InteractionGraph:
    if fmt not in EDGE_FORMATS:
        raise DataError(f"unknown edge format {fmt!r}; expected one of {', '.join(EDGE_FORMATS)}")
    src, dst, cnt = [], [], []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        ncol = len(toks)
        if (fmt == "pairs" and ncol != 2) or (fmt == "weighted" and ncol != 3) or ncol not in (2, 3):
            raise DataError(f"line {lineno}: expected {'2' if fmt == 'pairs' else '3' if fmt == 'weighted' else '2 or 3'} columns, got {ncol}")
        src.append(_parse_id(toks[0], lineno))
        dst.append(_parse_id(toks[1], lineno))
        if ncol == 3:
            try:
                c = int(toks[2])
            except ValueError:
                raise DataError(f"line {lineno}: count {toks[2]!r} is not an integer") from None
            if c < 1:
                raise DataError(f"line {lineno}: count must be >= 1, got {c}")
            cnt.append(c)
        else:
            cnt.append(1)
    return InteractionGraph.from_pairs(
        np.array(src, dtype=np.uint64), np.array(dst, dtype=np.uint64), np.array(cnt, dtype=np.int64)
    )


def ingest_edges(path, fmt: str = "auto") -> InteractionGraph:
    """Read a whitespace-separated edge list (``source target [count]``)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"edge file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return parse_edges(fh, fmt)


def export_edges(graph: InteractionGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in graph.edges():
            fh.write(f"{e.source}\t{e.target}\t{e.count}\n")


def write_idmap(graph: InteractionGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# internal_index\texternal_id\n")
        for i, u in enumerate(graph.users):
            fh.write(f"{i}\t{int(u)}\n")


# ----------------------------------------------------------------------
# labels

@dataclass(frozen=True)
class Label:
    region: str
    party: str
    tier: Tier


DEFAULT_COLORS = (
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
    "#46f0f0", "#f032e6", "#bcf60c", "#008080", "#9a6324",
)


@dataclass
class LabelSet:
    """User -> (region, party, tier), plus a per-region ordered party catalog."""

    assignments: dict[int, Label] = field(default_factory=dict)
    catalog: dict[str, list[tuple[str, str]]] = field(default_factory=dict)

    def __post_init__(self):
        for uid, lab in self.assignments.items():
            if lab.party not in self.parties(lab.region):
                raise DataError(f"user {uid}: party {lab.party!r} not in catalog for region {lab.region!r}")

    def __len__(self) -> int:
        return len(self.assignments)

    @property
    def regions(self) -> list[str]:
        return list(self.catalog)

    def parties(self, region: str) -> list[str]:
        return [p for p, _ in self.catalog.get(region, [])]

    def colors(self, region: str) -> dict[str, str]:
        return dict(self.catalog.get(region, []))

    def class_index(self, region: str) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.parties(region))}

    def users(self, region: str | None = None, tier: Tier | str | None = None) -> list[int]:
        tier = Tier.parse(tier) if isinstance(tier, str) else tier
        return sorted(
            u for u, lab in self.assignments.items()
            if (region is None or lab.region == region) and (tier is None or lab.tier == tier)
        )

    def class_counts(self, region: str, tier: Tier | str | None = None) -> list[int]:
        idx = self.class_index(region)
        counts = [0] * len(idx)
        for u in self.users(region, tier):
            counts[idx[self.assignments[u].party]] += 1
        return counts

    def region_of(self, ids) -> str:
        """The single region covering the labelled users among ``ids``."""
        found = {self.assignments[int(u)].region for u in ids if int(u) in self.assignments}
        if len(found) != 1:
            raise DataError(
                f"expected labelled users from exactly one region, found {sorted(found) or 'none'}; pass a region"
            )
        return found.pop()


def read_catalog(path) -> dict[str, list[tuple[str, str]]]:
    catalog: dict[str, list[tuple[str, str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.split()
            if len(toks) not in (2, 3):
                raise DataError(f"catalog line {lineno}: expected 'region party [color]'")
            region, party = toks[0], toks[1]
            entries = catalog.setdefault(region, [])
            color = toks[2] if len(toks) == 3 else DEFAULT_COLORS[len(entries) % len(DEFAULT_COLORS)]
            if any(p == party for p, _ in entries):
                raise DataError(f"catalog line {lineno}: duplicate party {party!r} in {region}")
            entries.append((party, color))
    return catalog


def write_catalog(catalog, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for region, entries in catalog.items():
            for party, color in entries:
                fh.write(f"{region}\t{party}\t{color}\n")


def ingest_labels(path, catalog_path=None) -> LabelSet:
    """Read ``user_id region party tier`` records.

    Without a catalog file the party order per region is first appearance.
    """
    catalog = read_catalog(catalog_path) if catalog_path is not None else None
    assignments: dict[int, Label] = {}
    inferred: dict[str, list[tuple[str, str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.split()
            if len(toks) != 4:
                raise DataError(f"label line {lineno}: expected 4 fields, got {len(toks)}")
            uid = _parse_id(toks[0], lineno)
            region, party, tier = toks[1], toks[2], Tier.parse(toks[3])
            if uid in assignments:
                raise DataError(f"label line {lineno}: user {uid} labelled twice")
            if catalog is not None:
                if party not in {p for p, _ in catalog.get(region, [])}:
                    raise DataError(f"label line {lineno}: party {party!r} absent from catalog for {region!r}")
            else:
                entries = inferred.setdefault(region, [])
                if all(p != party for p, _ in entries):
                    entries.append((party, DEFAULT_COLORS[len(entries) % len(DEFAULT_COLORS)]))
            assignments[uid] = Label(region, party, tier)
    return LabelSet(assignments, catalog if catalog is not None else inferred)


def write_labels(labels: LabelSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for uid in sorted(labels.assignments):
            lab = labels.assignments[uid]
            fh.write(f"{uid}\t{lab.region}\t{lab.party}\t{lab.tier.value}\n")
