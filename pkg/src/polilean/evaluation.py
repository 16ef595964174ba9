"""Evaluation protocols: leave-one-out, k-shot and cross-tier transfer."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import classify
from .classify import Dataset
from .embedding import EmbeddingMatrix
from .errors import ConfigError, DataError
from .graph import LabelSet, Tier

log = logging.getLogger(__name__)


# ----------------------------------------------------------------------
# metrics


def confusion_matrix(gold, pred, num_classes: int) -> np.ndarray:
    gold = np.asarray(gold, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if gold.shape != pred.shape:
        raise ValueError(f"gold has {gold.size} labels, pred has {pred.size}")
    return np.bincount(gold * num_classes + pred, minlength=num_classes**2).reshape(num_classes, num_classes)


def f1_from_confusion(conf) -> np.ndarray:
    """Per-class F1; a class with no gold and no predicted items scores 0."""
    conf = np.asarray(conf, dtype=np.float64)
    tp = np.diag(conf)
    denom = conf.sum(0) + conf.sum(1)
    return np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)


def macro_f1(gold, pred, num_classes: int) -> float:
    return float(f1_from_confusion(confusion_matrix(gold, pred, num_classes)).mean())


def paired_bootstrap(gold, pred_a, pred_b, num_classes: int | None = None,
                     iterations: int = 10000, seed: int = 0) -> float:
    """Two-sided bootstrap p-value for the macro-F1 difference of two systems.

    Test items are resampled with replacement; the p-value is the share of
    resamples whose centred difference is at least as extreme as the observed
    one.
    """
    gold, pred_a, pred_b = (np.asarray(a, dtype=np.int64) for a in (gold, pred_a, pred_b))
    if not (len(gold) == len(pred_a) == len(pred_b)):
        raise ValueError("gold and predictions differ in length")
    K = num_classes or int(max(gold.max(), pred_a.max(), pred_b.max())) + 1
    observed = macro_f1(gold, pred_a, K) - macro_f1(gold, pred_b, K)
    rng = np.random.default_rng(seed)
    n = len(gold)
    extreme = 0
    for _ in range(iterations):
        idx = rng.integers(0, n, n)
        delta = macro_f1(gold[idx], pred_a[idx], K) - macro_f1(gold[idx], pred_b[idx], K)
        if abs(delta - observed) >= abs(observed) - 1e-15:
            extreme += 1
    return (extreme + 1) / (iterations + 1)


# ----------------------------------------------------------------------
# scenarios


@dataclass(frozen=True)
class Scenario:
    kind: str  # "loo" | "kshot" | "tier"
    k: int = 0
    reps: int = 20
    test_tier: Tier | None = None

    @classmethod
    def parse(cls, text: str, reps: int = 20) -> "Scenario":
        t = text.strip().lower()
        if t == "loo":
            return cls("loo")
        if t.startswith("kshot:"):
            try:
                k = int(t.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"bad k in scenario {text!r}") from None
            if k < 1 or reps < 1:
                raise ConfigError("k-shot needs k >= 1 and reps >= 1")
            return cls("kshot", k=k, reps=reps)
        if t.startswith("tier:"):
            tier = Tier.parse(t.split(":", 1)[1])
            return cls("tier", test_tier=tier)
        raise ConfigError(f"unknown scenario {text!r}; use loo, kshot:<k> or tier:<supporter|sympathizer>")

    def __str__(self) -> str:
        if self.kind == "kshot":
            return f"kshot:{self.k}"
        if self.kind == "tier":
            return f"tier:{self.test_tier.value}"
        return "loo"


@dataclass
class EvalReport:
    scenario: str
    classifier: str
    class_names: list[str]
    macro_f1: float
    per_class_f1: dict[str, float]
    confusion: np.ndarray
    n_test: int
    macro_f1_sd: float = 0.0
    rep_scores: list[float] = field(default_factory=list)
    predictions: dict[int, int] = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)
    seconds: float = 0.0  # wall time; kept out of serialized reports

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario, "classifier": self.classifier, "class_names": self.class_names,
            "macro_f1": self.macro_f1, "macro_f1_sd": self.macro_f1_sd, "per_class_f1": self.per_class_f1,
            "confusion": self.confusion.tolist(), "n_test": self.n_test, "rep_scores": self.rep_scores,
            "predictions": {str(k): v for k, v in sorted(self.predictions.items())}, "manifest": self.manifest,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"scenario\t{self.scenario}", f"classifier\t{self.classifier}",
                 f"macro_f1\t{self.macro_f1:.6f}", f"macro_f1_sd\t{self.macro_f1_sd:.6f}",
                 f"n_test\t{self.n_test}"]
        lines += [f"f1.{name}\t{self.per_class_f1[name]:.6f}" for name in self.class_names]
        for name, row in zip(self.class_names, self.confusion):
            lines.append(f"confusion.{name}\t" + "\t".join(str(int(x)) for x in row))
        for k, v in sorted(self.manifest.items()):
            lines.append(f"manifest.{k}\t{v}")
        return "\n".join(lines) + "\n"


def labelled_matrix(features: EmbeddingMatrix, labels: LabelSet, region: str | None = None,
                    tier: Tier | str | None = None):
    """``(ids, X, y, class_names, region)`` for labelled users with vectors.

    Users without a vector are dropped with a warning.
    """
    if region is None:
        region = labels.region_of(features.ids)
    ids = np.array(labels.users(region, tier), dtype=np.uint64)
    rows = features.rows(ids)
    if (rows < 0).any():
        log.warning("%d labelled users have no vector and are excluded", int((rows < 0).sum()))
    ids, rows = ids[rows >= 0], rows[rows >= 0]
    index = labels.class_index(region)
    y = np.array([index[labels.assignments[int(u)].party] for u in ids], dtype=np.int64)
    return ids, features.vectors[rows], y, labels.parties(region), region


def _report(scenario, kind, names, gold, pred, ids, manifest) -> EvalReport:
    K = len(names)
    conf = confusion_matrix(gold, pred, K)
    f1 = f1_from_confusion(conf)
    return EvalReport(str(scenario), kind, list(names), float(f1.mean()),
                      {n: float(v) for n, v in zip(names, f1)}, conf, len(gold),
                      predictions={int(u): int(p) for u, p in zip(ids, pred)}, manifest=manifest)


def run_loo(features: EmbeddingMatrix, labels: LabelSet, classifier: str = "logreg",
            region: str | None = None, params: dict | None = None, seed: int = 0,
            tier: Tier | str = Tier.MEMBER) -> EvalReport:
    """Leave-one-out over a tier; predictions pooled into one confusion matrix."""
    kind = classify.resolve_kind(classifier)
    t0 = time.perf_counter()
    ids, X, y, names, region = labelled_matrix(features, labels, region, tier)
    if len(y) < 2:
        raise DataError("leave-one-out needs at least two labelled users")
    counts = np.bincount(y, minlength=len(names))
    if (counts == 1).any():
        log.info("classes with one user train their fold without that class: %s",
                 [names[k] for k in np.flatnonzero(counts == 1)])
    pred = np.empty(len(y), dtype=np.int64)
    keep = np.ones(len(y), bool)
    for i in range(len(y)):
        keep[i] = False
        model = classify.train(kind, Dataset(X[keep], y[keep], names), seed=seed, **(params or {}))
        pred[i] = model.predict(X[i : i + 1])[0]
        keep[i] = True
    manifest = {"region": region, "seed": seed}
    rep = _report(Scenario("loo"), kind, names, y, pred, ids, manifest)
    rep.seconds = time.perf_counter() - t0
    return rep


def run_kshot(features: EmbeddingMatrix, labels: LabelSet, k: int, reps: int = 20,
              classifier: str = "logreg", region: str | None = None, params: dict | None = None,
              seed: int = 0, tier: Tier | str = Tier.MEMBER) -> EvalReport:
    """``k`` training users per class, the rest tested; mean and sd over reps.

    The confusion matrix pools all repetitions.
    """
    kind = classify.resolve_kind(classifier)
    if k < 1 or reps < 1:
        raise ConfigError("k-shot needs k >= 1 and reps >= 1")
    t0 = time.perf_counter()
    ids, X, y, names, region = labelled_matrix(features, labels, region, tier)
    K = len(names)
    counts = np.bincount(y, minlength=K)
    for c in range(K):
        if counts[c] < k:
            raise DataError(f"class {names[c]!r} has {counts[c]} users, fewer than k={k}")
    rng = np.random.default_rng(seed)
    conf = np.zeros((K, K), dtype=np.int64)
    scores, per_class = [], []
    for _ in range(reps):
        train = np.concatenate([rng.choice(np.flatnonzero(y == c), k, replace=False) for c in range(K) if counts[c]])
        test = np.setdiff1d(np.arange(len(y)), train)
        model = classify.train(kind, Dataset(X[train], y[train], names), seed=seed, **(params or {}))
        pred = model.predict(X[test])
        c_rep = confusion_matrix(y[test], pred, K)
        conf += c_rep
        f1 = f1_from_confusion(c_rep)
        per_class.append(f1)
        scores.append(float(f1.mean()))
    pc = np.mean(per_class, axis=0)
    manifest = {"region": region, "seed": seed, "k": k, "reps": reps}
    return EvalReport(f"kshot:{k}", kind, list(names), float(np.mean(scores)),
                      {n: float(v) for n, v in zip(names, pc)}, conf, int(conf.sum()),
                      macro_f1_sd=float(np.std(scores)), rep_scores=scores, manifest=manifest,
                      seconds=time.perf_counter() - t0)


def run_crosstier(features: EmbeddingMatrix, labels: LabelSet, test_tier: Tier | str,
                  classifier: str = "logreg", region: str | None = None, params: dict | None = None,
                  seed: int = 0, train_tier: Tier | str = Tier.MEMBER) -> EvalReport:
    """Train on every member, test on every user of ``test_tier``."""
    kind = classify.resolve_kind(classifier)
    test_tier = Tier.parse(test_tier) if isinstance(test_tier, str) else test_tier
    t0 = time.perf_counter()
    _, Xtr, ytr, names, region = labelled_matrix(features, labels, region, train_tier)
    ids, Xte, yte, _, _ = labelled_matrix(features, labels, region, test_tier)
    if len(yte) == 0:
        raise DataError(f"no {test_tier.value} users with vectors in region {region}")
    model = classify.train(kind, Dataset(Xtr, ytr, names), seed=seed, **(params or {}))
    pred = model.predict(Xte)
    manifest = {"region": region, "seed": seed}
    rep = _report(Scenario("tier", test_tier=test_tier), kind, names, yte, pred, ids, manifest)
    rep.seconds = time.perf_counter() - t0
    return rep


def run_scenario(scenario: Scenario | str, features, labels, classifier="logreg", region=None,
                 params=None, seed=0, reps: int = 20) -> EvalReport:
    sc = Scenario.parse(scenario, reps) if isinstance(scenario, str) else scenario
    if sc.kind == "loo":
        return run_loo(features, labels, classifier, region, params, seed)
    if sc.kind == "kshot":
        return run_kshot(features, labels, sc.k, sc.reps, classifier, region, params, seed)
    return run_crosstier(features, labels, sc.test_tier, classifier, region, params, seed)


def silhouette(X, labels) -> float:
    """Mean silhouette coefficient (Euclidean); singleton clusters score 0."""
    from scipy.spatial.distance import cdist

    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise DataError("silhouette needs at least two clusters")
    D = cdist(X, X)
    s = np.zeros(len(X))
    for i in range(len(X)):
        own = labels == labels[i]
        if own.sum() <= 1:
            continue
        a = D[i, own].sum() / (own.sum() - 1)
        b = min(D[i, labels == c].mean() for c in classes if c != labels[i])
        s[i] = 0.0 if max(a, b) == 0 else (b - a) / max(a, b)
    return float(s.mean())
