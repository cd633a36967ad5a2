import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ela_explain.errors import ConfigError, InvalidArgumentError, NumericFailure, SchemaMismatchError
from ela_explain.models import (ForestModel, ModelSpec, TreeModel, best_mae_split, fit_decision_tree, fit_mlp,
                                fit_model, fit_random_forest, init_mlp, load_model, standard_model_specs, predict,
                                save_model)
from ela_explain.models.tree import prefix_abs_dev
from oracles import best_depth2_loss, brute_split, depth2_loss, greedy_depth2


# ------------------------------------------------------------------ splits

def test_split_perfect():
    thr, loss = best_mae_split([1, 2, 3, 4], np.array([0, 0, 10, 10.0]))
    assert thr == 2.5 and loss == 0


def test_split_constant_feature():
    assert best_mae_split([1, 1, 1, 1], [1, 2, 3, 4.0]) is None


def test_split_length_mismatch():
    with pytest.raises(InvalidArgumentError):
        best_mae_split([1, 2, 3], [1.0, 2.0])


def test_split_two_targets_matches_oracle():
    rng = np.random.default_rng(30)
    x = rng.normal(size=30)
    Y = rng.normal(size=(30, 2))
    thr, loss = best_mae_split(x, Y)
    othr, oloss = brute_split(x, Y)
    assert thr == othr and loss == pytest.approx(oloss, abs=1e-12)


def test_split_min_leaf():
    x = np.arange(10.0)
    y = np.r_[np.zeros(1), np.ones(9)]
    thr, _ = best_mae_split(x, y, min_leaf=3)
    assert 2 < thr < 7
    assert best_mae_split(x[:5], y[:5], min_leaf=3) is None


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40))
def test_prefix_abs_dev_matches_direct(v):
    v = np.array(v)
    direct = [np.abs(v[:k + 1] - np.median(v[:k + 1])).sum() for k in range(len(v))]
    assert np.allclose(prefix_abs_dev(v), direct, rtol=1e-9, atol=1e-6)


# ------------------------------------------------------------------- trees

def test_constant_y_single_leaf():
    t = fit_decision_tree(np.random.default_rng(0).normal(size=(20, 3)), np.full(20, 4.2))
    assert t.n_nodes == 1 and t.predict(np.zeros(3))[0] == 4.2


def test_depth_limit_binds():
    rng = np.random.default_rng(1)
    X = rng.uniform(size=(700, 2))
    y = X[:, 0] * 10 + X[:, 1] + rng.normal(0, 0.01, 700)
    t = fit_decision_tree(X, y, max_depth=9)
    assert t.depth == 9
    assert t.n_leaves <= 512 and t.n_nodes <= 2**10 - 1


def test_depth2_tree_matches_greedy_oracle():
    # integer targets keep tied losses exactly tied, so both sides pick the smallest threshold
    rng = np.random.default_rng(2)
    X = rng.normal(size=(20, 3))
    Y = rng.integers(0, 20, size=(20, 1)).astype(float)
    t = fit_decision_tree(X, Y, max_depth=2)
    root, kids = greedy_depth2(X, Y)
    assert (t.feature[0], t.threshold[0]) == (root[0], root[1])
    got = []
    for child in (t.left[0], t.right[0]):
        got.append(None if t.feature[child] < 0 else (int(t.feature[child]), float(t.threshold[child])))
    assert got == [None if k is None else (k[0], k[1]) for k in kids]
    # greedy can never beat the exhaustive optimum over all depth-2 trees
    assert depth2_loss(X, Y, root, kids) >= best_depth2_loss(X, Y) - 1e-12


def test_leaf_values_are_medians():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 2))
    Y = rng.normal(size=(60, 2))
    t = fit_decision_tree(X, Y, max_depth=3)
    leaves = t.apply(X)
    for leaf in np.unique(leaves):
        assert np.allclose(t.value[leaf], np.median(Y[leaves == leaf], axis=0))
        assert t.coverage[leaf] == np.sum(leaves == leaf)


def test_piecewise_constant():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(50, 2))
    t = fit_decision_tree(X, X[:, 0] ** 2, max_depth=4)
    x = np.array([0.1234, -0.5])
    thr = t.threshold[t.feature >= 0]
    gap = np.min(np.abs(thr - x[0]))
    assert np.array_equal(t.predict(x), t.predict(x + [gap / 2 * 0.99, 0.0])) or gap == 0


def test_mtr_leaf_routing():
    t = TreeModel(feature=np.array([0, -1, -1]), threshold=np.array([0.0, 0, 0]), left=np.array([1, -1, -1]),
                  right=np.array([2, -1, -1]), value=np.array([[0, 0], [5.5, 0.81], [1, 1.0]]),
                  coverage=np.array([2.0, 1, 1]), n_features=1)
    assert predict(t, np.array([-1.0])).tolist() == [5.5, 0.81]


def test_schema_mismatch():
    t = fit_decision_tree(np.zeros((4, 3)) + np.arange(4)[:, None], np.arange(4.0))
    with pytest.raises(SchemaMismatchError, match="3"):
        t.predict(np.zeros(2))


def test_wrong_target_count():
    with pytest.raises(InvalidArgumentError):
        fit_model(ModelSpec("tree", "MTR", "both"), np.zeros((5, 2)), np.zeros((5, 1)))


# ------------------------------------------------------------------ forest

def test_forest_single_tree_no_bootstrap_equals_tree():
    rng = np.random.default_rng(5)
    X, y = rng.normal(size=(40, 4)), rng.normal(size=40)
    f = fit_random_forest(X, y, n_estimators=1, max_depth=5, max_features=None, bootstrap=False)
    t = fit_decision_tree(X, y, max_depth=5)
    P = rng.normal(size=(100, 4))
    assert np.array_equal(f.predict(P), t.predict(P))


def test_forest_mean_and_determinism():
    rng = np.random.default_rng(6)
    X, Y = rng.normal(size=(50, 6)), rng.normal(size=(50, 2))
    f = fit_random_forest(X, Y, n_estimators=7, seed=3)
    g = fit_random_forest(X, Y, n_estimators=7, seed=3)
    P = rng.normal(size=(1000, 6))
    mean = np.mean([t.predict(P) for t in f.trees], axis=0)
    assert np.max(np.abs(f.predict(P) - mean)) <= 1e-12
    assert np.array_equal(f.predict(P), g.predict(P))


def test_forest_of_identical_stumps():
    stump = fit_decision_tree(np.array([[0.0], [1.0]]), np.array([1.0, 3.0]), max_depth=1)
    f = ForestModel([stump, stump, stump], [0, 0, 0])
    assert f.predict(np.array([0.7])).tolist() == stump.predict(np.array([0.7])).tolist()


# --------------------------------------------------------------------- mlp

def test_zero_epoch_fit_is_initial_network():
    rng = np.random.default_rng(7)
    X, Y = rng.normal(size=(30, 4)), rng.normal(size=(30, 1))
    m = fit_mlp(X, Y, epochs=0, seed=11)
    init_seed = int(np.random.SeedSequence(11).generate_state(2)[0])
    ref = init_mlp(4, 1, seed=init_seed)
    Z = m.standardizer.transform(X)
    assert np.array_equal(m.predict(X), ref.forward_scaled(Z))


def test_mlp_learns_linear_target():
    rng = np.random.default_rng(8)
    X = rng.uniform(-1, 1, (200, 1))
    m = fit_mlp(X, 2 * X[:, :1] + 1, epochs=100, seed=0)
    assert m.history[-1] < 1e-2


def test_mlp_gradient_check():
    rng = np.random.default_rng(9)
    m = init_mlp(5, 2, seed=1)
    Z, Y = rng.normal(size=(12, 5)), rng.normal(size=(12, 2))
    theta = m.get_params()
    _, g = m.loss_and_grad(Z, Y)
    worst = 0.0
    for i in rng.choice(len(theta), 20, replace=False):
        h = 1e-6
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        m.set_params(tp)
        lp, _ = m.loss_and_grad(Z, Y)
        m.set_params(tm)
        lm, _ = m.loss_and_grad(Z, Y)
        fd = (lp - lm) / (2 * h)
        worst = max(worst, abs(fd - g[i]) / max(abs(fd), abs(g[i]), 1e-8))
    m.set_params(theta)
    assert worst < 1e-4


def test_mlp_layout_and_parameter_count(caplog):
    import logging
    with caplog.at_level(logging.INFO):
        m = fit_mlp(np.zeros((10, 54)), np.zeros((10, 1)), epochs=1)
    assert len(m.weights) == 6 and m.layer_sizes[-1] == 1            # 5 hidden + output (7 layers with input and concat)
    assert str(m.n_parameters) in caplog.text
    mtr = fit_mlp(np.zeros((10, 54)), np.zeros((10, 2)), epochs=1, widths=(48, 32, 32, 24, 16))
    assert mtr.layer_sizes[-1] == 2


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_mlp_nonfinite_loss_diagnostics():
    X = np.ones((10, 2)) * np.arange(10)[:, None]
    with pytest.raises(NumericFailure, match="epoch 0, batch 0"):
        fit_mlp(X, np.full((10, 1), np.inf), epochs=1)


# ------------------------------------------------------------ spec + io

def test_spec_defaults_and_validation():
    assert ModelSpec("tree", "STR", "precision").hyperparameters["max_depth"] == 9
    assert ModelSpec("tree", "MTR", "both").hyperparameters["max_depth"] == 10
    assert ModelSpec("forest", "MTR", "both").hyperparameters["n_estimators"] == 20
    assert ModelSpec("forest", "STR", "log_precision").hyperparameters["n_estimators"] == 10
    mlp = ModelSpec("mlp", "STR", "precision").hyperparameters
    assert (mlp["epochs"], mlp["batch_size"], mlp["learning_rate"]) == (100, 10, 0.001)
    with pytest.raises(ConfigError):
        ModelSpec("tree", "STR", "both")
    with pytest.raises(ConfigError):
        ModelSpec("svm", "STR", "precision")
    assert len(standard_model_specs()) == 9


@pytest.mark.parametrize("family", ["tree", "forest", "mlp"])
def test_serialization_roundtrip(tmp_path, family):
    rng = np.random.default_rng(10)
    X, Y = rng.normal(size=(40, 5)), rng.normal(size=(40, 2))
    spec = ModelSpec(family, "MTR", "both", {"epochs": 3} if family == "mlp" else {})
    m = fit_model(spec, X, Y, seed=2)
    p = tmp_path / "m.json"
    save_model(p, m, model_id=spec.model_id)
    back = load_model(p)
    P = rng.normal(size=(200, 5))
    assert np.max(np.abs(back.predict(P) - m.predict(P))) <= 1e-12
