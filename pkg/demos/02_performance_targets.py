"""
Regression targets from a baseline optimiser
============================================

The target of every problem instance is the precision reached by CMA-ES
(median of several seeded runs), and its log-transform.
"""

from ela_explain.performance import collect_performance, default_budget, log_transform, run_cmaes
from ela_explain.problems import make_problem

# One run with a per-generation trace.
ev = make_problem(8, 1, 2)
trace = []
best = run_cmaes(ev, budget=600, seed=1, trace=trace)
print("rosenbrock: best precision", f"{best:.3e}", "after", trace[-1]["evals"], "evaluations")
for row in trace[::10]:
    print(f"  gen {row['generation']:3d}  evals {row['evals']:4d}  best {row['best_precision']:.3e}")

# Median over runs, as used for the training data.
for fid in (1, 13, 21):
    rec = collect_performance(make_problem(fid, 1, 2), runs=3, budget=1000)
    print(f"f{fid}: precision {rec.target:.3e}  log10(1+p) {rec.log_target:.4f}")

# The log-transform anchors, and the default budget of 50*d*lambda.
print([log_transform(p) for p in (0, 9, 99)], default_budget(5))
