"""Multi-subspace search region built around the important coordinates.

Each iteration the unimportant coordinates are frozen to one of ``M_t + 1``
imputations: the incumbent's own values (always first) followed by
``M_t`` uniform random draws. Acquisition then searches the full unit box
over the important coordinates, once per imputation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gp import ContractError

BEST_SO_FAR = "best_so_far"
RANDOM = "random"


def mt_schedule(t, n=3):
    """Number of random imputations at iteration ``t``: ``ceil(t ** (1/n))``.

    Exact for integers: the result ``m`` satisfies ``(m-1)**n < t <= m**n``.
    """
    t, n = int(t), int(n)
    if t < 1 or n < 2:
        raise ContractError("need t >= 1 and n >= 2")
    m = max(1, int(round(t ** (1.0 / n))))
    while m ** n < t:
        m += 1
    while m > 1 and (m - 1) ** n >= t:
        m -= 1
    return m


@dataclass(frozen=True)
class SearchSpaceSpec:
    """Important index set plus fixed values for the remaining coordinates."""

    dim: int
    important: np.ndarray
    imputations: tuple
    source_tags: tuple

    @property
    def unimportant(self):
        mask = np.ones(self.dim, dtype=bool)
        mask[self.important] = False
        return np.flatnonzero(mask)

    def __len__(self):
        return len(self.imputations)

    def assemble_point(self, imputation_index, v):
        """Scatter ``v`` into the important coordinates and the chosen
        imputation into the rest."""
        if not 0 <= imputation_index < len(self.imputations):
            raise ContractError("imputation index out of range")
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.important.size:
            raise ContractError("v must have one entry per important coordinate")
        x = np.empty(v.shape[:-1] + (self.dim,))
        x[..., self.important] = v
        x[..., self.unimportant] = self.imputations[imputation_index]
        return x


def _as_index_set(important, dim):
    idx = np.unique(np.asarray(important, dtype=int).reshape(-1))
    if idx.size == 0:
        raise ContractError("important set must be nonempty")
    if idx[0] < 0 or idx[-1] >= dim:
        raise ContractError("important index out of range")
    return idx


def build_search_space(important, best_x, t, n=3, rng=None, n_random=None):
    """Build the region for iteration ``t``.

    ``n_random`` overrides the ``M_t`` schedule (0 gives the incumbent
    imputation only).
    """
    best_x = np.asarray(best_x, dtype=float).reshape(-1)
    dim = best_x.size
    if np.any(best_x < 0) or np.any(best_x > 1):
        raise ContractError("best_x must lie in [0, 1]^D")
    idx = _as_index_set(important, dim)
    idx.setflags(write=False)
    rest = np.setdiff1d(np.arange(dim), idx)
    if rest.size == 0:
        return SearchSpaceSpec(dim, idx, (np.zeros(0),), (BEST_SO_FAR,))
    m = mt_schedule(t, n) if n_random is None else int(n_random)
    rng = np.random.default_rng(rng)
    imps = [best_x[rest].copy()]
    imps.extend(rng.uniform(0.0, 1.0, (m, rest.size)))
    return SearchSpaceSpec(dim, idx, tuple(imps), (BEST_SO_FAR,) + (RANDOM,) * m)


def assemble_point(spec, imputation_index, v):
    return spec.assemble_point(imputation_index, v)
