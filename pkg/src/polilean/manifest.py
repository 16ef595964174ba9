"""Run manifests: what ran, with which settings, and digests of what it wrote."""
from __future__ import annotations

import hashlib
import json
import os
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path

from . import __version__
from .errors import DataError

FILENAME = "manifest.json"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _plain(obj):
    if is_dataclass(obj):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "value") and not isinstance(obj, (int, float, str)):
        return obj.value
    if hasattr(obj, "item"):
        return obj.item()
    return obj


@dataclass
class RunManifest:
    """Paths are stored relative to the manifest's directory."""

    command: list[str]
    config: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)
    version: str = __version__
    root: Path = field(default=Path("."), repr=False)

    def _rel(self, path) -> str:
        return os.path.relpath(Path(path).resolve(), self.root.resolve())

    def add_input(self, path) -> None:
        self.inputs[str(Path(path).resolve())] = sha256_file(path)

    def add_artifact(self, path) -> None:
        self.artifacts[self._rel(path)] = sha256_file(path)

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(self.timings.get(name, 0.0) + time.perf_counter() - t0, 6)

    def to_dict(self) -> dict:
        d = {k: _plain(getattr(self, k)) for k in
             ("command", "config", "seeds", "inputs", "timings", "artifacts", "version")}
        d["format"] = "polilean-manifest"
        return d

    def write(self, path=None) -> Path:
        path = Path(path) if path is not None else self.root / FILENAME
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def read_manifest(path) -> RunManifest:
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from None
    if d.get("format") != "polilean-manifest":
        raise DataError(f"{path} is not a run manifest")
    return RunManifest(d["command"], d["config"], d["seeds"], d["inputs"], d["timings"],
                       d["artifacts"], d["version"], root=path.parent)


def verify_manifest(path) -> list[str]:
    """Recompute artifact digests; returns one message per problem (empty when clean)."""
    m = read_manifest(path)
    problems = []
    for rel, digest in sorted(m.artifacts.items()):
        p = m.root / rel
        if not p.exists():
            problems.append(f"missing: {rel}")
        elif sha256_file(p) != digest:
            problems.append(f"digest mismatch: {rel}")
    return problems
