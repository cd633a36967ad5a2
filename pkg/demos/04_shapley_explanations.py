"""
Shapley explanations
====================

Exact TreeSHAP for trees and forests, KernelSHAP for the network, and the
brute-force subset enumeration that both are checked against.
"""

import numpy as np

from ela_explain.analysis import global_importance
from ela_explain.models import fit_decision_tree, fit_mlp, fit_random_forest
from ela_explain.shap import brute_force_shap, explain_dataset, kernel_shap, tree_shap

rng = np.random.default_rng(1)
X = rng.normal(size=(300, 6))
y = 3 * X[:, 0] + np.where(X[:, 2] > 0, 2.0, 0.0) + 0.1 * rng.normal(size=300)
names = [f"x{j}" for j in range(6)]

# TreeSHAP agrees with enumerating all 2^F coalitions.
tree = fit_decision_tree(X, y, max_depth=5)
phi, base = tree_shap(tree, X[0])
bphi, _ = brute_force_shap(tree, X[0])
print("tree:  max |TreeSHAP - brute force| =", np.abs(phi - bphi).max())
print("       base + sum(phi) =", (base + phi.sum(axis=0))[0], " prediction =", tree.predict(X[0])[0])

# Global importance: mean |shap| over the explained rows.
forest = fit_random_forest(X, y, n_estimators=10, seed=0)
e = explain_dataset(forest, X[:100], feature_names=names, model_id="forest")
print("forest ranking:", [(n, round(v, 3)) for n, v in global_importance(e, 3)])

# KernelSHAP: efficiency holds exactly because it is a constraint of the fit.
net = fit_mlp(X, y, epochs=30, seed=0)
phi, base = kernel_shap(net.predict, X[:50], X[0], seed=0)
print("mlp:   base + sum(phi) - f(x) =", float(base[0] + phi.sum() - net.predict(X[0])[0]))
e = explain_dataset(net, X[:40], background=X[:50], feature_names=names, model_id="mlp")
print("mlp ranking:", [n for n, _ in global_importance(e, 3)])
