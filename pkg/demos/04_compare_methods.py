"""
LassoBO against its baselines on a padded Levy function
=======================================================

A small end-to-end run: 30-dimensional Levy with 6 effective coordinates,
a short budget and three seeds. Log regret is ln(f_max - best value so far).
Expect a few minutes on one core.
"""

import numpy as np

from lassobo import DROPOUT_BO, LASSOBO, RANDOM_SEARCH, RunConfig, make_benchmark, repeat_runs

obj = make_benchmark("levy-d30-e6")
results = {}
for method in (LASSOBO, DROPOUT_BO, RANDOM_SEARCH):
    cfg = RunConfig(method=method, budget_T=40, n_init=20, dropout_d=6, seed=0)
    results[method] = repeat_runs(obj, cfg, n_repeats=3)

print(f"{'evaluation':>10s}" + "".join(f"{m:>12s}" for m in results))
n = results[LASSOBO].median.size
for i in list(range(0, n, 10)) + [n - 1]:
    print(f"{i + 1:10d}" + "".join(f"{s.median[i]:12.3f}" for s in results.values()))

# which coordinates did LassoBO think mattered at the end?
last = results[LASSOBO].runs[0].records[-1]
print("effective:", obj.effective_indices.tolist(), " selected at the end:", list(last.important))
