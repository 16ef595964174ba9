import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polilean.classify import (
    KINDS, Dataset, DecisionTree, gini, read_model, resolve_kind, save_model, softmax_loss_grad, split_impurity,
    train, train_gnb, train_linsvm, train_logreg, train_majority, train_rf,
)
from polilean.classify.svm import hinge_objective
from polilean.errors import ConfigError, DataError


def two_blobs(rng, n=10):
    X = np.vstack([rng.normal(size=(n, 2)) + 5, rng.normal(size=(n, 2)) - 5])
    return Dataset(X, np.repeat([0, 1], n), ["pos", "neg"])


def grid():
    g = np.linspace(-8, 8, 9)
    return np.array([(a, b) for a in g for b in g])


@pytest.mark.parametrize("kind", ["logreg", "gnb", "linsvm", "rf"])
def test_separable_toy_is_fit_exactly(rng, kind):
    data = two_blobs(rng)
    model = train(kind, data, seed=1)
    assert (model.predict(data.X) == data.y).all()


def test_softmax_gradient_matches_finite_differences(rng):
    X, W, b = rng.normal(size=(8, 3)), rng.normal(size=(4, 3)), rng.normal(size=4)
    Y = np.eye(4)[rng.integers(0, 4, 8)]
    _, dW, db = softmax_loss_grad(W, b, X, Y, 0.3)
    h = 1e-6
    num_W = np.zeros_like(W)
    for i in np.ndindex(W.shape):
        e = np.zeros_like(W)
        e[i] = h
        num_W[i] = (softmax_loss_grad(W + e, b, X, Y, 0.3)[0] - softmax_loss_grad(W - e, b, X, Y, 0.3)[0]) / (2 * h)
    num_b = np.array([(softmax_loss_grad(W, b + h * e, X, Y, 0.3)[0] - softmax_loss_grad(W, b - h * e, X, Y, 0.3)[0])
                      / (2 * h) for e in np.eye(4)])
    for got, want in ((dW, num_W), (db, num_b)):
        assert np.linalg.norm(got - want) / np.linalg.norm(want) < 1e-5


def test_mirrored_data_gives_zero_bias(rng):
    A = rng.normal(size=(15, 2)) + [2, 1]
    model = train_logreg(Dataset(np.vstack([A, -A]), np.repeat([0, 1], 15)))
    assert np.abs(model.b).max() < 1e-3
    assert model.info["converged"]


def test_logreg_single_class_degenerates(rng):
    with pytest.warns(RuntimeWarning):
        model = train_logreg(Dataset(rng.normal(size=(4, 2)), [1, 1, 1, 1], ["a", "b"]))
    assert model.predict(rng.normal(size=(3, 2))).tolist() == [1, 1, 1]


def test_logreg_proba_invariant_to_shifted_bias(rng):
    data = two_blobs(rng)
    model = train_logreg(data)
    before = model.predict_proba(data.X)
    model.b = model.b + 3.0  # softmax ignores a common shift
    np.testing.assert_allclose(model.predict_proba(data.X), before, atol=1e-12)


def test_gnb_boundary_midway():
    # mirrored samples: exact class means 0 and 10, equal variances
    base = np.array([-1.5, -0.5, 0.5, 1.5])
    X = np.r_[base, base + 10][:, None]
    model = train_gnb(Dataset(X, np.repeat([0, 1], 4)))
    assert model.predict([[4.99]])[0] == 0 and model.predict([[5.01]])[0] == 1


def test_gnb_zero_variance_feature_is_floored():
    X = np.array([[0.0, 1.0], [1.0, 1.0], [5.0, 1.0], [6.0, 1.0]])
    model = train_gnb(Dataset(X, [0, 0, 1, 1]))
    assert (model.variances > 0).all()
    assert np.isfinite(model.decision_function([[0.5, 2.0]])[:, model.present]).all()


def test_gnb_posterior_closed_form():
    X = np.array([0.0, 2.0, 4.0, 3.0, 5.0, 7.0, 9.0])[:, None]
    y = np.array([0, 0, 0, 1, 1, 1, 1])
    model = train_gnb(Dataset(X, y))
    x = 3.3
    m0, v0 = 2.0, np.var([0.0, 2.0, 4.0])
    m1, v1 = 6.0, np.var([3.0, 5.0, 7.0, 9.0])

    def dens(m, v):
        return math.exp(-(x - m) ** 2 / (2 * v)) / math.sqrt(2 * math.pi * v)

    joint0, joint1 = 3 / 7 * dens(m0, v0), 4 / 7 * dens(m1, v1)
    assert model.predict_proba([[x]])[0, 1] == pytest.approx(joint1 / (joint0 + joint1), abs=1e-10)


def test_svm_scale_invariant_predictions(rng):
    data = two_blobs(rng)
    a = train_linsvm(data, seed=3)
    b = train_linsvm(Dataset(data.X * 10, data.y), seed=3)
    np.testing.assert_array_equal(a.predict(grid()), b.predict(grid() * 10))


def test_svm_two_points_bisector():
    p, q = np.array([3.0, 1.0]), np.array([-1.0, -1.0])
    model = train_linsvm(Dataset(np.vstack([p, q]), [0, 1]), c=10.0, epochs=2000)
    mid, normal = (p + q) / 2, (p - q) / np.linalg.norm(p - q)
    scores = model.decision_function(np.vstack([mid, mid + normal, mid - normal]))
    margin = scores[:, 0] - scores[:, 1]
    # the boundary crosses the segment within 5% of its length from the midpoint
    assert abs(margin[0]) < 0.05 * abs(margin[1] - margin[2]) / 2 * np.linalg.norm(p - q)
    assert margin[1] > 0 > margin[2]


def test_svm_objective_non_increasing(rng):
    model = train_linsvm(two_blobs(rng, 30), epochs=30)
    hist = np.array(model.info["objective_history"])
    assert np.all(np.diff(hist) <= 0)
    data = two_blobs(rng, 30)
    X = np.hstack([model.scaler(data.X), np.ones((60, 1))])
    Y = np.where(data.y[:, None] == [0, 1], 1.0, -1.0)
    assert hinge_objective(np.zeros_like(model.W), X, Y, 1.0).tolist() == [60.0, 60.0]


def test_svm_has_no_probabilities(rng):
    with pytest.raises(NotImplementedError):
        train_linsvm(two_blobs(rng)).predict_proba([[0.0, 0.0]])


def test_gini_hand_values():
    assert gini([2, 2]) == 0.5 and gini([4, 0]) == 0.0 and gini([]) == 0.0
    assert split_impurity([2, 2], [4, 0]) == 0.25


def test_tree_learns_xor():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    tree = DecisionTree().fit(X, y, 2)
    assert (tree.predict(X) == y).all()
    forest = train_rf(Dataset(X, y), trees=5, bootstrap=False, features_per_split=2)
    assert (forest.predict(X) == y).all()


def test_pure_data_gives_single_leaves(rng):
    forest = train_rf(Dataset(rng.normal(size=(10, 3)), np.full(10, 2), ["a", "b", "c"]), trees=7)
    assert all(t.n_leaves == 1 for t in forest.trees)
    assert (forest.predict(rng.normal(size=(5, 3))) == 2).all()


def test_single_unbagged_tree_equals_plain_tree(rng):
    data = Dataset(rng.normal(size=(40, 3)), rng.integers(0, 3, 40))
    forest = train_rf(data, trees=1, bootstrap=False, features_per_split=3)
    tree = DecisionTree().fit(data.X, data.y, 3)
    probe = rng.normal(size=(50, 3))
    np.testing.assert_array_equal(forest.predict(probe), tree.predict(probe))


def test_forest_reports_oob_and_threads_agree(rng):
    data = two_blobs(rng, 20)
    a = train_rf(data, trees=20, seed=4)
    b = train_rf(data, trees=20, seed=4, threads=3)
    assert 0.0 <= a.info["oob_accuracy"] <= 1.0
    probe = rng.normal(size=(30, 2)) * 5
    np.testing.assert_array_equal(a.predict_proba(probe), b.predict_proba(probe))


def test_majority_ties_go_to_lowest_index():
    model = train_majority(Dataset(np.zeros((4, 1)), [2, 1, 2, 1], ["a", "b", "c"]))
    assert model.predict(np.zeros((2, 1))).tolist() == [1, 1]


def test_majority_picks_largest_party():
    names = ["SNP", "SCU", "SL", "SGP", "SLD"]
    y = np.repeat(np.arange(5), [59, 16, 20, 6, 8])
    model = train_majority(Dataset(np.zeros((len(y), 1)), y, names))
    assert names[model.predict([[0.0]])[0]] == "SNP"


@pytest.mark.parametrize("kind", ["logreg", "gnb", "rf", "majority"])
def test_probabilities_are_distributions(rng, kind):
    data = Dataset(rng.normal(size=(30, 2)), np.r_[np.zeros(10), np.ones(10), np.full(10, 3)].astype(int))
    P = train(kind, data).predict_proba(rng.normal(size=(12, 2)))
    np.testing.assert_allclose(P.sum(1), 1.0)
    assert (P[:, 2] == 0).all()  # class 2 never seen


@pytest.mark.parametrize("kind", KINDS)
def test_training_is_deterministic(rng, kind):
    data = two_blobs(rng)
    probe = rng.normal(size=(20, 2)) * 4
    a, b = train(kind, data, seed=9), train(kind, data, seed=9)
    np.testing.assert_array_equal(a.decision_function(probe), b.decision_function(probe))


@pytest.mark.parametrize("kind", KINDS)
def test_model_round_trip(tmp_path, rng, kind):
    data = Dataset(rng.normal(size=(30, 3)), rng.integers(0, 3, 30), ["x", "y", "z"])
    model = train(kind, data, seed=2)
    save_model(model, tmp_path / "m.json")
    back = read_model(tmp_path / "m.json")
    probe = rng.normal(size=(10, 3))
    np.testing.assert_array_equal(back.decision_function(probe), model.decision_function(probe))
    assert back.class_names == ["x", "y", "z"] and back.kind == model.kind


def test_kind_resolution():
    assert resolve_kind("SVM") == "linsvm" and resolve_kind("lr") == "logreg"
    for bad in ("svm-rbf", "svm-poly", "knn"):
        with pytest.raises(ConfigError):
            resolve_kind(bad)


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(np.zeros((3, 2)), [0, 1])
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 2)), [0, 2], ["a", "b"])
    with pytest.raises(DataError):
        Dataset(np.array([[np.nan]]), [0])


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31))
def test_gnb_rows_sum_to_one(k, seed):
    r = np.random.default_rng(seed)
    data = Dataset(r.normal(size=(3 * k, 2)), np.repeat(np.arange(k), 3))
    P = train_gnb(data).predict_proba(r.normal(size=(5, 2)) * 10)
    np.testing.assert_allclose(P.sum(1), 1.0, atol=1e-12)
