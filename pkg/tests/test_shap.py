import numpy as np
import pytest

from ela_explain.errors import InvalidArgumentError, SchemaMismatchError
from ela_explain.models import ForestModel, TreeModel, fit_decision_tree, fit_mlp, fit_random_forest
from ela_explain.shap import (brute_force_shap, coalition_masks, expected_value, explain_dataset, forest_shap,
                              kernel_shap, read_explanation_csv, shapley_from_game, tree_shap,
                              write_explanation_csv, write_prediction_csv)
from oracles import permutation_shapley, tree_value_given


def stump(F=5, f=3, thr=0.5, lo=0.0, hi=10.0, cov=(50, 50)):
    return TreeModel(feature=np.array([f, -1, -1]), threshold=np.array([thr, 0, 0.0]),
                     left=np.array([1, -1, -1]), right=np.array([2, -1, -1]),
                     value=np.array([[(cov[0] * lo + cov[1] * hi) / sum(cov)], [lo], [hi]]),
                     coverage=np.array([float(sum(cov)), cov[0], cov[1]]), n_features=F)


def random_tree(seed, F=None, depth=None, T=1):
    rng = np.random.default_rng(seed)
    F = F or int(rng.integers(2, 7))
    n = int(rng.integers(8, 60))
    X = rng.normal(size=(n, F))
    Y = rng.normal(size=(n, T))
    return fit_decision_tree(X, Y, max_depth=depth or int(rng.integers(1, 6))), rng


# ---------------------------------------------------------------- TreeSHAP

def test_stump_example():
    t = stump()
    phi, base = tree_shap(t, np.array([0, 0, 0, 0.9, 0]))
    assert base[0] == 5.0
    assert phi[:, 0].tolist() == [0, 0, 0, 5.0, 0]


def test_single_leaf_has_zero_attributions():
    t = fit_decision_tree(np.zeros((3, 4)), np.array([2.0, 2.0, 2.0]))
    phi, base = tree_shap(t, np.ones(4))
    assert np.all(phi == 0) and base[0] == 2.0


def test_dummy_feature_gets_zero():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 3))
    t = fit_decision_tree(X, X[:, 0] + X[:, 2], max_depth=4)
    used = set(t.feature[t.feature >= 0].tolist())
    phi, _ = tree_shap(t, rng.normal(size=3))
    for f in set(range(3)) - used:
        assert phi[f, 0] == 0


def test_symmetry():
    # f(x) = 1 if x0 > 0 and x1 > 0, balanced coverage: both features are interchangeable
    t = TreeModel(feature=np.array([0, -1, 1, -1, -1]), threshold=np.zeros(5),
                  left=np.array([1, -1, 3, -1, -1]), right=np.array([2, -1, 4, -1, -1]),
                  value=np.array([[0.25], [0], [0.5], [0], [1.0]]), coverage=np.array([4.0, 2, 2, 1, 1]),
                  n_features=2)
    phi, _ = tree_shap(t, np.array([1.0, 1.0]))
    assert phi[0, 0] == pytest.approx(phi[1, 0], abs=1e-15)
    assert phi.sum() == pytest.approx(0.75, abs=1e-15)


def test_zero_coverage_rejected():
    t = stump()
    t.coverage[:] = 0
    with pytest.raises(InvalidArgumentError):
        tree_shap(t, np.zeros(5))


def test_wrong_probe_shape():
    with pytest.raises(InvalidArgumentError):
        tree_shap(stump(), np.zeros(4))


@pytest.mark.parametrize("seed", range(25))
def test_treeshap_matches_brute_force_and_permutation_oracle(seed):
    t, rng = random_tree(seed, T=2)
    x = rng.normal(size=t.n_features)
    phi, base = tree_shap(t, x)
    bphi, bbase = brute_force_shap(t, x)
    assert np.max(np.abs(phi - bphi)) <= 1e-12
    assert np.allclose(base, expected_value(t)) and np.allclose(base, bbase)
    if t.n_features <= 5:
        ophi = permutation_shapley(lambda S: tree_value_given(t, x, S), t.n_features)
        assert np.max(np.abs(bphi - ophi)) <= 1e-12
    assert np.max(np.abs(phi.sum(axis=0) + base - t.predict(x))) <= 1e-12


def test_brute_force_refuses_wide_trees():
    t = fit_decision_tree(np.eye(21), np.arange(21.0), max_depth=1)
    with pytest.raises(InvalidArgumentError):
        brute_force_shap(t, np.zeros(21))


def test_shapley_from_game_additive():
    masks = coalition_masks(4).astype(float)
    w = np.array([1.0, -2.0, 0.5, 3.0])
    assert np.allclose(shapley_from_game(masks @ w)[:, 0], w, atol=1e-14)


# ------------------------------------------------------------------ forest

def test_forest_shap_single_and_identical_trees():
    t, rng = random_tree(3, F=4)
    x = rng.normal(size=4)
    phi1, b1 = forest_shap(ForestModel([t], [0]), x)
    phi3, b3 = forest_shap(ForestModel([t, t, t], [0, 0, 0]), x)
    phi, b = tree_shap(t, x)
    assert np.allclose(phi1, phi, atol=1e-15) and np.allclose(phi3, phi, atol=1e-15)
    assert np.allclose(b1, b) and np.allclose(b3, b)


def test_forest_shap_is_mean_of_tree_shap():
    rng = np.random.default_rng(4)
    X, Y = rng.normal(size=(40, 5)), rng.normal(size=(40, 2))
    f = fit_random_forest(X, Y, n_estimators=6, max_depth=4, seed=1)
    for x in rng.normal(size=(20, 5)):
        phi, base = forest_shap(f, x)
        parts = [tree_shap(t, x) for t in f.trees]
        assert np.max(np.abs(phi - np.mean([p for p, _ in parts], axis=0))) <= 1e-12
        assert np.max(np.abs(phi.sum(axis=0) + base - f.predict(x))) <= 1e-12


# ------------------------------------------------------------- KernelSHAP

def _linear(w, c=0.5):
    return lambda X: np.atleast_2d(X) @ w + c


def test_kernel_additive_model_sampled():
    rng = np.random.default_rng(5)
    F = 12
    w = rng.normal(size=F)
    bg = rng.normal(size=(30, F))
    x = rng.normal(size=F)
    phi, base = kernel_shap(_linear(w), bg, x, n_coalitions=300, seed=1)
    exact = w * (x - bg.mean(axis=0))
    assert np.all(np.abs(phi[:, 0] - exact) <= 0.05 * np.abs(exact) + 1e-9)


def test_kernel_full_enumeration_matches_permutation_oracle():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(60, 5))
    m = fit_mlp(X, np.sin(X[:, 0]) * X[:, 1] + X[:, 2] ** 2, epochs=3, seed=0)
    bg = X[:8]
    x = rng.normal(size=5)

    def v(S):
        hyb = bg.copy()
        for f in S:
            hyb[:, f] = x[f]
        return m.predict(hyb).mean(axis=0)

    phi, base = kernel_shap(m.predict, bg, x, n_coalitions=64)
    ref = permutation_shapley(v, 5)
    assert np.max(np.abs(phi - ref)) <= 1e-8
    assert np.allclose(base, v(frozenset()))


def test_kernel_efficiency_is_exact_when_sampling():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(50, 10))
    m = fit_mlp(X, X[:, 0] * X[:, 1], epochs=2)
    x = rng.normal(size=10)
    phi, base = kernel_shap(m.predict, X[:20], x, n_coalitions=40, seed=3)
    assert abs(phi.sum() + base[0] - m.predict(x)[0]) <= 1e-10


def test_kernel_guards():
    bg = np.zeros((5, 4))
    with pytest.raises(InvalidArgumentError, match="2F\\+2"):
        kernel_shap(_linear(np.ones(4)), bg, np.ones(4), n_coalitions=9)
    with pytest.raises(InvalidArgumentError):
        kernel_shap(_linear(np.ones(4)), np.zeros((101, 4)), np.ones(4))
    with pytest.raises(InvalidArgumentError):
        kernel_shap(_linear(np.ones(4)), bg, np.ones(3))


def test_kernel_single_feature():
    phi, base = kernel_shap(_linear(np.array([2.0])), np.zeros((3, 1)), np.array([1.5]))
    assert phi[0, 0] == 3.0 and base[0] == 0.5


def test_kernel_singular_system_flags_ridge(monkeypatch):
    # a sampler that only ever returns one coalition leaves the system rank deficient
    import ela_explain.shap.kernel as kmod
    F = 30
    one = np.zeros((1, F), dtype=bool)
    one[0, :3] = True
    monkeypatch.setattr(kmod, "sample_coalitions", lambda F, n, rng: (one, np.array([float(n)])))
    flags = set()
    rng = np.random.default_rng(8)
    phi, base = kernel_shap(_linear(rng.normal(size=F)), rng.normal(size=(3, F)), rng.normal(size=F),
                            n_coalitions=2 * F + 2, seed=0, flags=flags)
    assert "kernel_shap.ridge" in flags
    assert np.all(np.isfinite(phi))


# ---------------------------------------------------------------- datasets

def test_explain_single_row_and_constant_model():
    t = fit_decision_tree(np.zeros((4, 3)), np.full(4, 7.0))
    e = explain_dataset(t, np.ones((1, 3)))
    assert e.shap.shape == (1, 3, 1) and np.all(e.shap == 0) and e.base_value[0] == 7.0
    m = fit_mlp(np.random.default_rng(0).normal(size=(10, 3)), np.zeros(10), epochs=0)
    m.weights[-1][:] = 0
    m.biases[-1][:] = 1.25
    e = explain_dataset(m, np.ones((1, 3)), n_coalitions=16)
    assert np.allclose(e.shap, 0, atol=1e-12) and e.base_value[0] == 1.25


def test_explain_feature_name_mismatch():
    with pytest.raises(SchemaMismatchError):
        explain_dataset(stump(), np.zeros((2, 5)), feature_names=["a"])


def test_explanation_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    X, Y = rng.normal(size=(30, 4)), rng.normal(size=(30, 2))
    f = fit_random_forest(X, Y, n_estimators=3, seed=0)
    e = explain_dataset(f, X[:6], feature_names=list("abcd"), instance_ids=[f"f1_i{i}" for i in range(6)],
                        target_names=["precision", "log_precision"])
    write_explanation_csv(tmp_path / "e.csv", e)
    write_prediction_csv(tmp_path / "p.csv", e)
    back = read_explanation_csv(tmp_path / "e.csv", tmp_path / "p.csv")
    assert back.feature_names == list("abcd") and back.target_names == ["precision", "log_precision"]
    assert np.array_equal(back.shap, e.shap) and np.array_equal(back.prediction, e.prediction)
    assert back.efficiency_gap() <= 1e-12
