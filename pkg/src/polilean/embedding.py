"""User embedding matrices and their text file format.

File layout::

    dim=<d> method=<name> seed=<s> [key=value ...]
    <external_id>\t<x_1>\t...\t<x_d>

Floats are written with ``repr`` so files round-trip exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, NumericError


@dataclass
class EmbeddingMatrix:
    ids: np.ndarray
    vectors: np.ndarray
    method: str
    seed: int = 0
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.uint64)
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or len(self.ids) != self.vectors.shape[0]:
            raise DataError(f"ids ({len(self.ids)}) and vectors {self.vectors.shape} disagree")
        if not np.isfinite(self.vectors).all():
            raise NumericError(f"{self.method} embedding contains non-finite values")
        order = np.argsort(self.ids, kind="stable")
        if not np.array_equal(order, np.arange(len(order))):
            self.ids, self.vectors = self.ids[order], self.vectors[order]
        self._index = None

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def rows(self, ids) -> np.ndarray:
        """Row positions for ``ids``; -1 where an id has no vector."""
        ids = np.asarray(ids, dtype=np.uint64)
        if len(self.ids) == 0:
            return np.full(len(ids), -1)
        pos = np.clip(np.searchsorted(self.ids, ids), 0, len(self.ids) - 1)
        return np.where(self.ids[pos] == ids, pos, -1)

    def lookup(self, ids) -> np.ndarray:
        r = self.rows(ids)
        if (r < 0).any():
            missing = np.asarray(ids)[r < 0][:5]
            raise DataError(f"no vector for users {list(map(int, missing))}")
        return self.vectors[r]

    def subset(self, ids) -> "EmbeddingMatrix":
        r = self.rows(ids)
        r = r[r >= 0]
        return EmbeddingMatrix(self.ids[r], self.vectors[r], self.method, self.seed, dict(self.meta))

    def header(self) -> str:
        parts = [f"dim={self.dim}", f"method={self.method}", f"seed={self.seed}"]
        parts += [f"{k}={v}" for k, v in sorted(self.meta.items())]
        return " ".join(parts)


def write_embedding(emb: EmbeddingMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emb.header() + "\n")
        for uid, row in zip(emb.ids, emb.vectors):
            fh.write(str(int(uid)) + "\t" + "\t".join(repr(float(x)) for x in row) + "\n")


def read_embedding(path) -> EmbeddingMatrix:
    path = Path(path)
    if not path.exists():
        raise DataError(f"embedding file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        head = fh.readline().split()
        info = {}
        for tok in head:
            if "=" not in tok:
                raise DataError(f"{path}: malformed header token {tok!r}")
            k, v = tok.split("=", 1)
            info[k] = v
        try:
            dim = int(info.pop("dim"))
            method = info.pop("method")
            seed = int(info.pop("seed", 0))
        except (KeyError, ValueError):
            raise DataError(f"{path}: header must carry dim=, method= and seed=") from None
        ids, rows = [], []
        for lineno, line in enumerate(fh, 2):
            toks = line.split()
            if not toks:
                continue
            if len(toks) != dim + 1:
                raise DataError(f"{path} line {lineno}: expected {dim + 1} fields, got {len(toks)}")
            ids.append(int(toks[0]))
            rows.append([float(x) for x in toks[1:]])
    vectors = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    return EmbeddingMatrix(np.array(ids, dtype=np.uint64), vectors, method, seed, info)
