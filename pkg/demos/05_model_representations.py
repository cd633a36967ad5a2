"""
Comparing models through their explanations
===========================================

Each fitted model is summarised by its mean Shapley vector.  Clustering
these vectors and intersecting the top-k feature sets shows which models
rely on the same landscape properties.
"""

import numpy as np

from ela_explain.analysis import hierarchical_cluster, model_representation, top_k_intersection
from ela_explain.models import ModelSpec, fit_model
from ela_explain.shap import explain_dataset

rng = np.random.default_rng(7)
F = 20
X = rng.normal(size=(400, F))
y = 2 * X[:, 3] + 3 * np.abs(X[:, 11]) + np.where(X[:, 15] > 0, 2.0, -1.0) + 0.1 * rng.normal(size=400)
names = [f"x{j}" for j in range(F)]

reps = {}
for fam in ("tree", "forest", "mlp"):
    model = fit_model(ModelSpec(fam, "STR", "precision", {"epochs": 60} if fam == "mlp" else {}), X, y, seed=1)
    e = explain_dataset(model, X[:60], background=X[:60], feature_names=names, model_id=fam)
    reps[fam] = model_representation(e, family=fam)

# Top-5 sets per family and the features shared by all of them.
inter = top_k_intersection(reps, k=5)
for fam, feats in inter.sets.items():
    print(f"{fam:6s} top-5: {feats}")
print("shared by all three:", inter.common())

# Average-linkage clustering of the signed representations.
c = hierarchical_cluster(list(reps.values()))
print("leaf order", [list(reps)[i] for i in c.leaf_order], "top split", c.partition)
