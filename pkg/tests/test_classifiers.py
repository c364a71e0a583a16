import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from credit_default.classifiers import (FITTERS, fit_adaboost, fit_gaussian_nb, fit_gbm, fit_knn,
                                        fit_lgbm, fit_model, fit_xgb, leaf_weight, learner_weight,
                                        load_model, model_from_json, model_to_json, predict_labels,
                                        save_model)
from credit_default.classifiers.lgbm import bin_edges, bin_matrix, goss_sample, grow_leafwise
from credit_default.classifiers.loss import gradient, hessian, log_loss, prior_log_odds, sigmoid
from credit_default.classifiers.xgb import split_gain
from credit_default.trees import LEAF


def blobs(seed, n=200, d=4):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    X = rng.normal(size=(n, d)) + y[:, None] * 1.2
    return X, y


# naive Bayes

def test_nb_symmetry():
    model = fit_gaussian_nb([[-1.0], [1.0]], [0, 1])
    assert model.score([[0.0]])[0] == pytest.approx(0.5)
    s = model.score([[1.0], [-1.0]])
    assert s[0] > 0.5 > s[1]


def test_nb_constant_feature_returns_prior():
    X = np.full((4, 1), 3.0)
    model = fit_gaussian_nb(X, [0, 0, 0, 1])
    np.testing.assert_allclose(model.score(X), 0.25)
    assert (model.var > 0).all()
    assert math.isclose(np.exp(model.log_prior).sum(), 1.0)


def test_nb_matches_hand_posterior():
    X = np.array([[0.0], [2.0], [4.0], [6.0]])
    y = np.array([0, 0, 1, 1])
    model = fit_gaussian_nb(X, y)
    eps = 1e-9 * X.var()
    x = 3.5

    def pdf(mu, var):
        return math.exp(-(x - mu) ** 2 / (2 * var)) / math.sqrt(2 * math.pi * var)
    p0, p1 = pdf(1.0, 1.0 + eps), pdf(5.0, 1.0 + eps)
    assert model.score([[x]])[0] == pytest.approx(p1 / (p0 + p1), abs=1e-12)


# k nearest neighbors

def test_knn_k1_recovers_training_labels():
    X, y = blobs(0, 50)
    np.testing.assert_array_equal(fit_knn(X, y, k=1).score(X), y)


def test_knn_tie_goes_to_class_zero():
    model = fit_knn([[0.0], [2.0]], [1, 0], k=2)
    assert model.predict([[1.0]])[0] == 0
    assert model.score([[1.0]])[0] == 0.5


def test_knn_tie_prefers_closer_class():
    model = fit_knn([[0.0], [0.1], [3.0], [3.2]], [1, 1, 0, 0], k=4)
    assert model.predict([[1.0]])[0] == 1


def test_knn_minority_fraction():
    model = fit_knn([[0.0], [1.0], [10.0]], [0, 0, 1], k=3)
    np.testing.assert_allclose(model.score([[-5.0], [4.0], [50.0]]), 1 / 3)


def test_knn_uses_manhattan():
    # (3, 0) is closer in L1, (2, 2) in L2
    model = fit_knn([[3.0, 0.0], [2.0, 2.0]], [1, 0], k=1)
    assert model.score([[0.0, 0.0]])[0] == 1.0


def test_knn_k_too_large():
    with pytest.raises(ValueError):
        fit_knn([[0.0], [1.0]], [0, 1], k=3)


# AdaBoost

def test_learner_weight_values():
    assert learner_weight(0.5) == 0.0
    assert learner_weight(0.1) == pytest.approx(1.0986123, abs=1e-6)
    assert math.isfinite(learner_weight(0.0)) and learner_weight(0.0) > 10


def test_adaboost_separable():
    X = np.arange(10.0)[:, None]
    y = (X[:, 0] > 4).astype(int)
    model = fit_adaboost(X, y)
    assert model.errors[0] <= 1e-10 and model.alphas[0] > 10
    np.testing.assert_array_equal(model.predict(X), y)


def test_adaboost_upweights_mistakes():
    X, y = blobs(1, 100, 2)
    history = []
    model = fit_adaboost(X, y, n_estimators=3, weight_history=history)
    stump = model.learners[0]
    wrong = (stump.predict(X)[:, 1] > 0.5) != y.astype(bool)
    assert history[0][wrong].min() > history[0][~wrong].max()
    assert len(model.learners) == len(model.alphas) <= 3


# shared loss pieces

@given(st.floats(-8, 8), st.sampled_from([0.0, 1.0]))
def test_gradient_and_hessian_match_finite_differences(F, y):
    eps = 1e-5

    def loss(f):
        return log_loss(np.array([y]), np.array([f]))
    num_g = (loss(F + eps) - loss(F - eps)) / (2 * eps)
    num_h = (loss(F + eps) - 2 * loss(F) + loss(F - eps)) / eps ** 2
    g = gradient(np.array([y]), np.array([F]))[0]
    assert g == pytest.approx(num_g, abs=1e-6)
    num_h2 = (gradient(np.array([y]), np.array([F + eps]))[0]
              - gradient(np.array([y]), np.array([F - eps]))[0]) / (2 * eps)
    assert hessian(np.array([y]), np.array([F]))[0] == pytest.approx(num_h2, abs=1e-6)
    assert hessian(np.array([y]), np.array([F]))[0] == pytest.approx(num_h, abs=1e-3)


def test_prior_log_odds():
    assert prior_log_odds([0, 1, 0, 1]) == 0.0
    assert prior_log_odds([0, 0, 0, 1]) == pytest.approx(math.log(1 / 3))


def test_predict_labels_threshold():
    np.testing.assert_array_equal(predict_labels([0.2, 0.5, 0.9]), [0, 1, 1])
    np.testing.assert_array_equal(predict_labels([0.2, 0.5, 0.9], 0.95), [0, 0, 0])


# boosting

@pytest.mark.parametrize("name", ["gbm", "xgboost", "lightgbm"])
@pytest.mark.parametrize("seed", range(3))
def test_training_loss_non_increasing(name, seed):
    X, y = blobs(seed, 300)
    params = {"min_data_in_leaf": 5} if name == "lightgbm" else {}
    if name == "lightgbm":
        params["a"] = 1.0
    model = fit_model(name, X, y, seed=seed, n_estimators=30, **params)
    loss = np.array(model.train_loss)
    assert (np.diff(loss) <= 1e-12).all()
    assert model.train_loss[-1] < model.train_loss[0]


def test_gbm_first_step_improves_and_balanced_prior_is_zero():
    X, y = blobs(3, 100)
    y = np.r_[np.zeros(50, int), np.ones(50, int)]
    model = fit_gbm(X, y, n_estimators=1)
    assert model.F0 == 0.0
    assert model.train_loss[1] <= model.train_loss[0]


def test_xgb_leaf_weight_closed_form():
    assert leaf_weight(2.0, 3.0, 1.0) == -0.5
    assert split_gain(1.0, 1.0, -1.0, 1.0, 0.0) == pytest.approx(0.5 * (1 + 1 - 0))


def test_xgb_large_gamma_gives_stumps_of_one_leaf():
    X, y = blobs(4)
    model = fit_xgb(X, y, gamma=1e6, n_estimators=3)
    assert all(tree.n_nodes == 1 for tree in model.trees)


@pytest.mark.parametrize("seed", range(5))
def test_xgb_without_regularization_matches_gbm_newton_leaves(seed):
    X, y = blobs(seed, 50, 3)
    gbm = fit_gbm(X, y, learning_rate=0.3, n_estimators=1, max_depth=3)
    xgb = fit_xgb(X, y, reg_lambda=0.0, gamma=0.0, learning_rate=0.3, n_estimators=1,
                  max_depth=3, min_child_weight=0.0)
    a, b = gbm.trees[0], xgb.trees[0]
    np.testing.assert_array_equal(a.feature, b.feature)
    np.testing.assert_allclose(a.threshold, b.threshold)
    leaves = a.feature == LEAF
    np.testing.assert_allclose(a.value[leaves, 0], b.value[leaves, 0], atol=1e-9)


def test_bin_edges_midpoints_and_cap():
    np.testing.assert_allclose(bin_edges(np.array([3.0, 1.0, 2.0, 2.0])), [1.5, 2.5])
    assert len(bin_edges(np.array([5.0, 5.0]))) == 0
    x = np.random.default_rng(0).normal(size=5000)
    e = bin_edges(x, 255)
    assert len(e) <= 254 and (np.diff(e) > 0).all()
    B = bin_matrix(x[:, None], [e])
    assert B.max() <= 254
    b = B[:, 0].astype(int)
    inner = b < len(e)
    assert (x[inner] <= e[b[inner]]).all()
    assert (x[b > 0] > e[b[b > 0] - 1]).all()


def test_goss_keeps_top_gradients():
    g = np.array([0.1, -5.0, 0.2, 3.0, -0.05, 0.3, 0.01, 0.4, -0.2, 0.0])
    rows, mult = goss_sample(g, 0.2, 0.3, np.random.default_rng(0))
    assert {1, 3} <= set(rows)
    assert mult[np.isin(rows, [1, 3])].tolist() == [1.0, 1.0]
    np.testing.assert_allclose(mult[~np.isin(rows, [1, 3])], (1 - 0.2) / 0.3)
    assert len(rows) == 5 and (np.diff(rows) > 0).all()


def test_goss_gradient_sum_unbiased():
    rng = np.random.default_rng(1)
    g = rng.normal(size=400)
    sums = []
    for i in range(3000):
        rows, mult = goss_sample(g, 0.2, 0.1, np.random.default_rng(i))
        sums.append((g[rows] * mult).sum())
    assert abs(np.mean(sums) - g.sum()) < 4 * np.std(sums) / math.sqrt(len(sums))


def same_structure(tree, X, want):
    splits, leaf = want
    internal = tree.feature != LEAF
    assert sorted(tree.feature[internal].tolist()) == sorted(f for f, _ in splits)
    assert oracles.same_partition(tree.apply(X), leaf)


@pytest.mark.parametrize("seed", range(5))
def test_goss_off_matches_exact_leafwise(seed):
    # binned thresholds sit at global midpoints, so compare the induced partition
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 3))
    g = rng.normal(size=50)
    h = rng.uniform(0.1, 0.3, size=50)
    edges = [bin_edges(X[:, j], 255) for j in range(3)]
    tree = grow_leafwise(bin_matrix(X, edges), edges, g, h, np.arange(50), max_leaves=6,
                         min_data_in_leaf=1, min_sum_hessian=0.0)
    same_structure(tree, X, oracles.leafwise_exact(X, g, h, max_leaves=6))


def test_lgbm_a1_forces_b_zero_and_matches_oracle_trees():
    X, y = blobs(7, 50, 3)
    model = fit_lgbm(X, y, a=1.0, b=0.5, n_estimators=1, max_leaves=4, min_data_in_leaf=1,
                     min_sum_hessian=0.0, learning_rate=1.0)
    assert model.b == 0.0
    p = np.full(50, sigmoid(model.F0))
    same_structure(model.trees[0], X, oracles.leafwise_exact(X, p - y, p * (1 - p), max_leaves=4))


def test_lgbm_two_leaves_is_a_stump():
    X, y = blobs(8)
    model = fit_lgbm(X, y, max_leaves=2, n_estimators=5)
    assert all(tree.n_leaves == 2 for tree in model.trees)


def test_lgbm_parameter_checks():
    X, y = blobs(9, 30)
    with pytest.raises(ValueError):
        fit_lgbm(X, y, a=0.8, b=0.5)
    with pytest.raises(ValueError):
        fit_lgbm(X, y, n_bins=300)


# registry and persistence

@pytest.mark.parametrize("name", sorted(FITTERS))
def test_single_class_rejected(name):
    with pytest.raises(ValueError):
        fit_model(name, np.zeros((5, 2)), np.zeros(5, int))


@pytest.mark.parametrize("name", sorted(FITTERS))
def test_round_trip_preserves_scores(name, tmp_path):
    X, y = blobs(10, 120)
    model = fit_model(name, X, y, seed=1, **({"n_estimators": 5} if name != "naive_bayes" and name != "knn" else {}))
    again = model_from_json(model_to_json(model))
    np.testing.assert_array_equal(model.score(X), again.score(X))
    path = save_model(model, tmp_path / "m.json")
    np.testing.assert_array_equal(load_model(path).predict(X), model.predict(X))


def test_unknown_format_rejected():
    with pytest.raises(ValueError):
        model_from_json('{"format": "other"}')
    with pytest.raises(KeyError):
        fit_model("svm", [[0.0]], [0])


@pytest.mark.parametrize("name", ["gbm", "xgboost", "lightgbm", "adaboost"])
def test_boosters_learn_blobs(name):
    X, y = blobs(11, 400)
    model = fit_model(name, X[:300], y[:300], seed=0, n_estimators=30)
    assert (model.predict(X[300:]) == y[300:]).mean() > 0.8
    s = model.score(X[300:])
    assert ((s >= 0) & (s <= 1)).all()
