"""Important-variable classification from fitted inverse lengthscales."""

from __future__ import annotations

from collections import deque

import numpy as np

from .gp import ContractError


def lower_median(stack):
    """Column-wise lower median (order statistic ``ceil(k/2)``) of a (k, D) stack."""
    stack = np.sort(np.asarray(stack, dtype=float), axis=0)
    k = stack.shape[0]
    return stack[(k + 1) // 2 - 1].copy()


def classify(rho):
    """Indices whose value is strictly above the mean of ``rho``.

    Falls back to the single largest entry (lowest index on ties) when no
    entry clears the mean.
    """
    rho = np.asarray(rho, dtype=float)
    important = np.flatnonzero(rho > rho.mean())
    if important.size == 0:
        important = np.array([int(np.argmax(rho))])
    return important


class ImportanceState:
    """Sliding window of fitted ``rho`` vectors and the last partition.

    With ``window=1`` classification uses the latest vector only; larger
    windows classify the elementwise (lower) median of the last ``window``
    vectors.
    """

    def __init__(self, dim, window=1):
        if window < 1:
            raise ContractError("window must be >= 1")
        self.dim = int(dim)
        self.window = int(window)
        self.rho_history = deque(maxlen=self.window)
        self.last_partition = None

    def push_and_classify(self, rho_t):
        rho_t = np.asarray(rho_t, dtype=float).reshape(-1)
        if rho_t.shape[0] != self.dim:
            raise ContractError(f"expected {self.dim} entries, got {rho_t.shape[0]}")
        if np.any(rho_t < 0):
            raise ContractError("rho entries must be nonnegative")
        self.rho_history.append(rho_t.copy())
        important = classify(lower_median(np.stack(self.rho_history)))
        self.last_partition = (important, int(important.size))
        return self.last_partition


def push_and_classify(state, rho_t):
    return state.push_and_classify(rho_t)


def selection_metrics(important, effective):
    """Precision and recall of a selected index set against the effective set."""
    I, E = set(int(i) for i in important), set(int(i) for i in effective)
    if not E:
        raise ContractError("effective set must be nonempty")
    hit = len(I & E)
    precision = hit / len(I) if I else 0.0
    return precision, hit / len(E)
