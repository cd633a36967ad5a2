"""
Landscape features of a benchmark problem
=========================================

Sample a problem with a maximin Latin hypercube and compute the 54
landscape features used throughout the package.
"""

import numpy as np

from ela_explain.landscape import aggregate_repetitions, compute_features
from ela_explain.problems import make_problem
from ela_explain.sampling import build_design

# f21 (Gallagher's 101 peaks), first instance, two dimensions.
ev = make_problem(21, 1, 2)
print(ev.instance, "bounds", ev.bounds, "optimum", round(ev.optimum_value, 3))

# Three independent designs of 50*d points; repetition r uses seed base+r.
samples = build_design(ev, n=100, repetitions=3, base_seed=42)
maps = [compute_features(s, ev) for s in samples]

# The instance-level feature vector is the per-feature median over repetitions.
features = aggregate_repetitions(maps)
print(len(features), "features")
for name in ("ela_distr.skewness", "ela_meta.quad_simple.adj_r2", "ic.h_max", "nbc.nn_nb.mean_ratio"):
    print(f"  {name:32s} {features[name]: .4f}")

# Degenerate samples are reported as flags rather than feature values.
print("flags:", sorted(features.flags) or "none")

# Same recipe on the sphere: the quadratic model explains everything.
sphere = make_problem(1, 1, 2)
fm = compute_features(build_design(sphere, 100, 1, 0)[0], sphere)
print("sphere quad adj_r2", np.round(fm["ela_meta.quad_simple.adj_r2"], 6))
