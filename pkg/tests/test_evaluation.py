import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_region
from polilean.embedding import EmbeddingMatrix
from polilean.errors import ConfigError, DataError
from polilean.evaluation import (
    Scenario, confusion_matrix, f1_from_confusion, labelled_matrix, macro_f1, paired_bootstrap, run_crosstier,
    run_kshot, run_loo, run_scenario, silhouette,
)
from polilean.graph import Label, LabelSet, Tier
from polilean.relational import RelationalConfig, train_relational

SCT = [184, 59, 52, 42, 24]
WAL = [55, 42, 42, 27]
NIR = [80, 65, 52, 58, 59]


def labelset(counts, tier=Tier.MEMBER, region="R", start=1):
    names = [f"P{i}" for i in range(len(counts))]
    assignments, uid = {}, start
    for name, c in zip(names, counts):
        for _ in range(c):
            assignments[uid] = Label(region, name, tier)
            uid += 1
    return LabelSet(assignments, {region: [(n, "#000000") for n in names]})


def majority_score(counts):
    gold = np.repeat(np.arange(len(counts)), counts)
    return 100 * macro_f1(gold, np.zeros_like(gold), len(counts))


@pytest.mark.parametrize("counts, want", [(SCT, 13.504587155963304), (WAL, 12.44343891402715),
                                          (NIR, 8.121827411167512)])
def test_majority_baseline_values(counts, want):
    assert majority_score(counts) == pytest.approx(want, abs=1e-9)


@pytest.mark.parametrize("counts, table", [(SCT, 13.5), (WAL, 12.4), (NIR, 8.1)])
def test_majority_loo_matches_table(counts, table):
    labels = labelset(counts)
    emb = EmbeddingMatrix(sorted(labels.assignments), np.zeros((sum(counts), 1)), "none")
    loo = 100 * run_loo(emb, labels, "majority").macro_f1
    assert abs(loo - table) <= 0.1
    assert abs(loo - majority_score(counts)) <= 0.5


def test_perfect_predictions():
    gold = np.array([0, 1, 2, 2, 1])
    assert macro_f1(gold, gold, 3) == 1.0


def test_absent_class_scores_zero():
    # class 2 never occurs in gold or pred yet still counts in the average
    assert macro_f1([0, 1], [0, 1], 3) == pytest.approx(2 / 3)
    assert f1_from_confusion(np.zeros((2, 2))).tolist() == [0.0, 0.0]


def test_length_mismatch():
    with pytest.raises(ValueError):
        confusion_matrix([0, 1], [0], 2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=60), st.randoms())
def test_confusion_invariants(pairs, rnd):
    gold, pred = (np.array(x) for x in zip(*pairs))
    conf = confusion_matrix(gold, pred, 4)
    assert conf.sum() == len(gold)
    assert conf.sum(1).tolist() == np.bincount(gold, minlength=4).tolist()
    assert conf.sum(0).tolist() == np.bincount(pred, minlength=4).tolist()
    order = list(range(len(gold)))
    rnd.shuffle(order)
    assert macro_f1(gold[order], pred[order], 4) == macro_f1(gold, pred, 4)
    assert 0.0 <= macro_f1(gold, pred, 4) <= 1.0


def onehot_features(labels, region="R"):
    index = labels.class_index(region)
    ids = sorted(labels.assignments)
    X = np.eye(len(index))[[index[labels.assignments[u].party] for u in ids]]
    return EmbeddingMatrix(ids, X, "onehot")


@pytest.mark.parametrize("kind", ["logreg", "gnb", "linsvm", "rf"])
def test_onehot_features_are_perfect(kind):
    labels = labelset([6, 5, 4])
    assert run_loo(onehot_features(labels), labels, kind).macro_f1 == 1.0


def test_random_features_near_chance():
    # held-out users shrink their own class, so single LOO runs on noise sit a little under chance
    scores = []
    for seed in range(10):
        labels = labelset([20] * 5)
        X = np.random.default_rng(seed).normal(size=(100, 2))
        scores.append(run_loo(EmbeddingMatrix(sorted(labels.assignments), X, "noise"), labels).macro_f1)
    assert 0.1 <= np.mean(scores) <= 0.3, scores


def test_loo_report_contents():
    labels = labelset([4, 3])
    rep = run_loo(onehot_features(labels), labels)
    assert rep.n_test == 7 and rep.confusion.tolist() == [[4, 0], [0, 3]]
    assert set(rep.predictions) == set(labels.assignments)
    assert json.loads(rep.to_json())["macro_f1"] == 1.0
    assert "macro_f1\t1.000000" in rep.to_text()
    assert rep.manifest == {"region": "R", "seed": 0}


def test_loo_tolerates_singleton_class():
    labels = labelset([5, 5, 1])
    rep = run_loo(onehot_features(labels), labels)
    assert rep.per_class_f1["P2"] == 0.0 and rep.n_test == 11


def test_users_without_vectors_are_dropped():
    labels = labelset([4, 4])
    emb = onehot_features(labels).subset([1, 2, 3, 5, 6, 7])
    ids, X, y, names, region = labelled_matrix(emb, labels)
    assert ids.tolist() == [1, 2, 3, 5, 6, 7] and names == ["P0", "P1"] and region == "R"


def test_kshot_matches_loo_on_onehot():
    labels = labelset([5, 5, 5])
    emb = onehot_features(labels)
    rep = run_kshot(emb, labels, k=4, reps=3)
    assert rep.macro_f1 == run_loo(emb, labels).macro_f1 == 1.0
    assert rep.n_test == 3 * 3 and len(rep.rep_scores) == 3


def test_kshot_deterministic():
    labels = labelset([8, 8, 8])
    X = np.random.default_rng(0).normal(size=(24, 2))
    emb = EmbeddingMatrix(sorted(labels.assignments), X, "noise")
    a = run_kshot(emb, labels, k=2, reps=1, seed=5)
    b = run_kshot(emb, labels, k=2, reps=1, seed=5)
    assert a.to_json() == b.to_json()


def test_kshot_rejects_small_class():
    labels = labelset([5, 2, 5])
    with pytest.raises(DataError, match="P1"):
        run_kshot(onehot_features(labels), labels, k=3)
    with pytest.raises(ConfigError):
        run_kshot(onehot_features(labels), labels, k=0)


def test_crosstier_self_alias_and_row_sums():
    labels = labelset([5, 5])
    support = labelset([3, 4], Tier.SUPPORTER, start=100)
    merged = LabelSet({**labels.assignments, **support.assignments}, labels.catalog)
    ids = sorted(merged.assignments)
    X = np.eye(2)[[merged.class_index("R")[merged.assignments[u].party] for u in ids]]
    emb = EmbeddingMatrix(ids, X + np.random.default_rng(1).normal(0, 0.3, X.shape), "f")
    same = run_crosstier(emb, merged, Tier.MEMBER)
    ids_m, Xm, ym, names, _ = labelled_matrix(emb, merged, "R", Tier.MEMBER)
    from polilean import classify
    train_acc = macro_f1(ym, classify.train("logreg", classify.Dataset(Xm, ym, names)).predict(Xm), 2)
    assert same.macro_f1 == train_acc
    rep = run_crosstier(emb, merged, "supporter")
    assert rep.confusion.sum(1).tolist() == [3, 4]


def test_crosstier_empty_tier():
    labels = labelset([3, 3])
    with pytest.raises(DataError):
        run_crosstier(onehot_features(labels), labels, Tier.SYMPATHIZER)


def test_scenario_parsing():
    assert Scenario.parse("loo").kind == "loo"
    assert Scenario.parse("KSHOT:3", reps=7) == Scenario("kshot", 3, 7)
    assert str(Scenario.parse("tier:sympathizer")) == "tier:sympathizer"
    for bad in ("kshot:x", "kshot:0", "folds"):
        with pytest.raises(ConfigError):
            Scenario.parse(bad)
    labels = labelset([4, 4])
    assert run_scenario("kshot:2", onehot_features(labels), labels, reps=2).scenario == "kshot:2"


def test_bootstrap_identical_systems():
    r = np.random.default_rng(0)
    gold, pred = r.integers(0, 3, 200), r.integers(0, 3, 200)
    assert paired_bootstrap(gold, pred, pred, iterations=500) >= 0.95


def test_bootstrap_perfect_vs_chance():
    r = np.random.default_rng(1)
    gold = r.integers(0, 5, 500)
    assert paired_bootstrap(gold, gold, r.integers(0, 5, 500), iterations=500) < 0.01


def test_bootstrap_deterministic():
    r = np.random.default_rng(2)
    gold, a, b = r.integers(0, 3, 100), r.integers(0, 3, 100), r.integers(0, 3, 100)
    assert paired_bootstrap(gold, a, b, iterations=300, seed=4) == paired_bootstrap(gold, a, b, iterations=300, seed=4)
    with pytest.raises(ValueError):
        paired_bootstrap(gold, a, b[:-1])


def test_silhouette_known_values():
    X = np.array([[0.0], [1.0], [10.0], [11.0]])
    # outer points: a = 1, b = 10.5; inner points: a = 1, b = 9.5
    want = np.mean([9.5 / 10.5, 8.5 / 9.5, 8.5 / 9.5, 9.5 / 10.5])
    assert silhouette(X, [0, 0, 1, 1]) == pytest.approx(want)
    with pytest.raises(DataError):
        silhouette(X, [0, 0, 0, 0])


def test_low_mixing_graph_with_relational_vectors():
    region = small_region(parties=("A", "B", "C"), mixing=0.05, seed=21)
    emb = train_relational(region.graph, RelationalConfig(share_tables=True, seed=21))
    assert run_loo(emb, region.labels, region="R").macro_f1 >= 0.95
