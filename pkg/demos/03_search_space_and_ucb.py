"""
Imputed subspaces and UCB maximization
======================================

Only the important coordinates are searched. The remaining ones are frozen
at the incumbent's values or at ceil(t^(1/3)) uniform random vectors, and
the acquisition step picks the best UCB point over every candidate subspace.
"""

import numpy as np

from lassobo import (AcqConfig, Dataset, KernelHyperparams, beta_t, build_search_space,
                     fit_posterior, maximize_over_space, mt_schedule)

rng = np.random.default_rng(3)
D = 6
X = rng.random((15, D))
y = -np.sum((X[:, :2] - 0.3) ** 2, axis=1)          # only x0, x1 matter
model = fit_posterior(Dataset(X, y), KernelHyperparams([6.0, 6.0, 0.1, 0.1, 0.1, 0.1]))

for t in (1, 8, 9, 64, 300):
    print(f"t={t:3d}: {mt_schedule(t)} random imputations")

best = X[np.argmax(y)]
spec = build_search_space([0, 1], best, t=9, rng=rng)
print("imputation sources:", spec.source_tags)

beta = beta_t(9, AcqConfig())
x, val = maximize_over_space(model, spec, beta, AcqConfig(), rng, incumbent=best)
print(f"beta_9 = {beta:.3f}")
print("proposal:", np.round(x, 3), f"UCB {val:.4f}")
used = [k for k, z in enumerate(spec.imputations) if np.array_equal(x[spec.unimportant], z)]
print("winning imputation:", spec.source_tags[used[0]] if used else "?")
