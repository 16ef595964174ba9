"""CART trees with the Gini criterion and bagged random forests."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .._accel import kernel
from .base import ClassifierModel, Dataset


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    return 0.0 if n == 0 else float(1.0 - ((counts / n) ** 2).sum())


def split_impurity(left_counts, right_counts) -> float:
    """Size-weighted Gini impurity of a two-way split."""
    nl, nr = float(np.sum(left_counts)), float(np.sum(right_counts))
    return (nl * gini(left_counts) + nr * gini(right_counts)) / (nl + nr)


@kernel
def best_split(X, y, idx, feats, n_classes):
    """Lowest weighted-Gini threshold over ``feats`` for rows ``idx``.

    Returns ``(feature, threshold, impurity)``; feature is -1 when no split
    separates the rows.  Ties keep the earliest feature and lowest threshold.
    """
    n = idx.shape[0]
    total = np.zeros(n_classes)
    for m in range(n):
        total[y[idx[m]]] += 1.0
    best_f = -1
    best_t = 0.0
    best_imp = np.inf
    left = np.zeros(n_classes)
    for fi in range(feats.shape[0]):
        f = feats[fi]
        vals = np.empty(n)
        for m in range(n):
            vals[m] = X[idx[m], f]
        order = np.argsort(vals, kind="mergesort")
        for k in range(n_classes):
            left[k] = 0.0
        for m in range(n - 1):
            c = y[idx[order[m]]]
            left[c] += 1.0
            v0 = vals[order[m]]
            v1 = vals[order[m + 1]]
            if v1 <= v0:
                continue
            nl = m + 1.0
            nr = n - nl
            sl = 0.0
            sr = 0.0
            for k in range(n_classes):
                sl += left[k] * left[k]
                r = total[k] - left[k]
                sr += r * r
            imp = (nl * (1.0 - sl / (nl * nl)) + nr * (1.0 - sr / (nr * nr))) / n
            if imp < best_imp - 1e-12:
                best_imp = imp
                best_f = f
                best_t = 0.5 * (v0 + v1)
    return best_f, best_t, best_imp


@kernel
def apply_tree(feature, threshold, left, right, X):
    out = np.empty(X.shape[0], np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


class DecisionTree:
    """Gini CART tree; ``max_features=None`` tries every feature at each split."""

    def __init__(self, max_depth=None, max_features=None, seed=0):
        self.max_depth = max_depth
        self.max_features = max_features
        self.seed = seed

    def fit(self, X, y, n_classes, sample_idx=None, rng=None):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        d = X.shape[1]
        mf = d if self.max_features is None else max(1, min(d, int(self.max_features)))
        idx0 = np.arange(len(y)) if sample_idx is None else np.asarray(sample_idx, dtype=np.int64)
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node(idx):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(np.bincount(y[idx], minlength=n_classes).astype(np.float64))
            return len(feature) - 1

        stack = [(new_node(idx0), idx0, 0)]
        while stack:
            node, idx, depth = stack.pop()
            counts = value[node]
            if len(idx) < 2 or (counts > 0).sum() <= 1:
                continue
            if self.max_depth is not None and depth >= self.max_depth:
                continue
            feats = np.arange(d) if mf == d else np.sort(rng.choice(d, mf, replace=False))
            f, t, _ = best_split(X, y, idx, feats, n_classes)
            if f < 0:
                continue
            mask = X[idx, f] <= t
            li, ri = idx[mask], idx[~mask]
            feature[node], threshold[node] = int(f), float(t)
            left[node] = new_node(li)
            right[node] = new_node(ri)
            stack.append((right[node], ri, depth + 1))
            stack.append((left[node], li, depth + 1))
        self.feature = np.array(feature, dtype=np.int64)
        self.threshold = np.array(threshold)
        self.left = np.array(left, dtype=np.int64)
        self.right = np.array(right, dtype=np.int64)
        self.value = np.array(value)
        self.n_classes = n_classes
        return self

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def leaf_distribution(self, X) -> np.ndarray:
        leaves = apply_tree(self.feature, self.threshold, self.left, self.right,
                            np.ascontiguousarray(X, dtype=np.float64))
        v = self.value[leaves]
        return v / v.sum(1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.leaf_distribution(X), axis=1)


class RandomForestModel(ClassifierModel):
    kind = "rf"

    def __init__(self, n_classes, present, trees, class_names=None):
        super().__init__(n_classes, present, class_names)
        self.trees = trees

    def votes(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        v = np.zeros((len(X), self.n_classes))
        for t in self.trees:
            v[np.arange(len(X)), t.predict(X)] += 1.0
        return v

    def decision_function(self, X):
        return self.votes(X)

    def predict_proba(self, X):
        return self.votes(X) / len(self.trees)

    def params(self):
        return {"trees": [{"feature": t.feature, "threshold": t.threshold, "left": t.left,
                           "right": t.right, "value": t.value} for t in self.trees]}


def train_rf(data: Dataset, trees: int = 100, max_depth=None, features_per_split=None,
             bootstrap: bool = True, seed: int = 0, threads: int = 1) -> RandomForestModel:
    """Bagged Gini trees with per-split feature subsampling (default sqrt(d))."""
    X = np.ascontiguousarray(data.X)
    n, d = X.shape
    mf = features_per_split if features_per_split is not None else max(1, int(math.sqrt(d)))
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trees)]

    def grow(t):
        rng = streams[t]
        idx = rng.integers(0, n, n) if bootstrap else np.arange(n)
        tree = DecisionTree(max_depth, None if mf >= d else mf).fit(X, data.y, data.n_classes, idx, rng)
        return tree, idx

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            grown = list(pool.map(grow, range(trees)))
    else:
        grown = [grow(t) for t in range(trees)]
    model = RandomForestModel(data.n_classes, np.unique(data.y), [g[0] for g in grown], data.class_names)
    if bootstrap:
        oob_votes = np.zeros((n, data.n_classes))
        for tree, idx in grown:
            oob = np.setdiff1d(np.arange(n), idx)
            if len(oob):
                oob_votes[oob, tree.predict(X[oob])] += 1
        has = oob_votes.sum(1) > 0
        model.info["oob_accuracy"] = float((oob_votes[has].argmax(1) == data.y[has]).mean()) if has.any() else float("nan")
    return model
