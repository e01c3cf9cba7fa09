"""GP-UCB and its maximization over a multi-subspace search region."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .gp import ContractError


@dataclass(frozen=True)
class AcqConfig:
    """Settings for :func:`maximize_over_space`.

    ``restarts_total`` random starts are shared across all imputations;
    ``n_keep`` of them per imputation are refined for ``refine_steps``
    projected ascent steps.
    """

    delta: float = 0.1
    beta_override: Optional[float] = None
    restarts_total: int = 64
    refine_steps: int = 50
    n_keep: int = 4
    step_size: float = 0.1

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ContractError("delta must lie in (0, 1)")
        if self.beta_override is not None and not self.beta_override > 0:
            raise ContractError("beta_override must be positive")
        for name in ("restarts_total", "n_keep", "step_size"):
            if not getattr(self, name) > 0:
                raise ContractError(f"{name} must be positive")
        if self.refine_steps < 0:
            raise ContractError("refine_steps must be nonnegative")

    def to_dict(self):
        return asdict(self)


def beta_t(t, cfg=None):
    """Exploration weight ``2 log(pi^2 t^2 / (6 delta))`` unless overridden."""
    cfg = cfg or AcqConfig()
    if t < 1:
        raise ContractError("t must be >= 1")
    if cfg.beta_override is not None:
        return float(cfg.beta_override)
    return float(2.0 * np.log(np.pi ** 2 * t ** 2 / (6.0 * cfg.delta)))


def ucb(model, x, beta):
    """``mean + sqrt(beta) * std`` at one point or a batch of rows."""
    if beta < 0:
        raise ContractError("beta must be nonnegative")
    mean, var = model.predict(x)
    return mean + np.sqrt(beta) * np.sqrt(var)


def _ucb_and_grad(model, X, beta, important):
    mean, var = model.predict(X)
    d_mean, d_std = model.predict_gradient(X)
    val = mean + np.sqrt(beta) * np.sqrt(var)
    grad = d_mean + np.sqrt(beta) * d_std
    return val, grad[:, important]


def _split_budget(total, parts):
    base, extra = divmod(int(total), parts)
    return [max(1, base + (1 if i < extra else 0)) for i in range(parts)]


def _refine(model, spec, k, V, beta, cfg):
    """Projected ascent on the important coordinates with per-start step halving.

    Steps move the largest gradient coordinate by the current step size; a
    step that does not improve UCB is rejected and the step size halved.
    """
    important = spec.important
    X = spec.assemble_point(k, V)
    val, grad = _ucb_and_grad(model, X, beta, important)
    step = np.full(V.shape[0], cfg.step_size)
    for _ in range(cfg.refine_steps):
        scale = np.max(np.abs(grad), axis=1)
        active = (scale > 0) & (step > 1e-10)
        if not np.any(active):
            break
        direction = np.zeros_like(grad)
        direction[active] = grad[active] / scale[active, None]
        V_new = np.clip(V + step[:, None] * direction, 0.0, 1.0)
        X_new = spec.assemble_point(k, V_new)
        val_new, grad_new = _ucb_and_grad(model, X_new, beta, important)
        better = active & (val_new > val)
        V[better], val[better], grad[better] = V_new[better], val_new[better], grad_new[better]
        step[active & ~better] *= 0.5
    return V, val


def maximize_over_space(model, spec, beta, cfg=None, rng=None, incumbent=None):
    """Maximize UCB over the important coordinates of every imputation.

    Parameters
    ----------
    model : PosteriorModel
    spec : SearchSpaceSpec
    beta : float
    cfg : AcqConfig
    rng : numpy.random.Generator or int
        Source of the random starts.
    incumbent : array_like, optional
        Full incumbent point; its important coordinates are added as an
        extra start under the first (best-so-far) imputation.

    Returns
    -------
    (numpy.ndarray, float)
        Best assembled point and its UCB value. Ties go to the earliest
        imputation, then the earliest start.
    """
    cfg = cfg or AcqConfig()
    rng = np.random.default_rng(rng)
    if spec.dim != model.dim:
        raise ContractError("search space and model disagree on dimension")
    d = spec.important.size
    budgets = _split_budget(cfg.restarts_total, len(spec))
    best_x, best_val = None, -np.inf
    for k, n_starts in enumerate(budgets):
        V = rng.uniform(0.0, 1.0, (n_starts, d))
        if k == 0 and incumbent is not None:
            inc = np.asarray(incumbent, dtype=float).reshape(-1)[spec.important]
            V = np.vstack([V, inc])
        vals = ucb(model, spec.assemble_point(k, V), beta)
        keep = np.argsort(-vals, kind="stable")[:cfg.n_keep]
        keep.sort()
        V_ref, val_ref = _refine(model, spec, k, V[keep].copy(), beta, cfg)
        # fold in unrefined starts so the result never trails the best start
        cand_V = np.vstack([V_ref, V])
        cand_val = np.concatenate([val_ref, vals])
        order = np.concatenate([keep, np.arange(V.shape[0])])
        top = np.max(cand_val)
        j = min(np.flatnonzero(cand_val == top), key=lambda i: (order[i], i))
        if top > best_val:
            best_val = top
            best_x = spec.assemble_point(k, cand_V[j])
    value = float(ucb(model, best_x, beta))
    return best_x, value
