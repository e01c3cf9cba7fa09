"""L1-penalized negative log marginal likelihood and its multi-start ADAM fit.

The objective minimized over the kernel hyperparameters is::

    U = 1/2 y^T A^-1 y + 1/2 log|A| + N/2 log(2 pi) + lam * sum(rho)
    A = K + noise_sq * I

``rho`` is optimized directly (no log transform) and projected onto
``[0, rho_max]`` after every step, so the penalty can pin irrelevant
coordinates at exactly zero.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg
import scipy.linalg.lapack

from .gp import (
    RHO_MAX,
    SIGMA_K_SQ_MAX,
    ContractError,
    KernelHyperparams,
    MATERN52,
    NumericalError,
    kernel_dr2,
    kernel_from_r2,
    safe_cholesky,
    standardize,
)

SIGMA_K_SQ_MIN = 1e-4
_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class FitConfig:
    """Settings for :func:`fit_hyperparams`."""

    lam: float = 1e-3
    n_init_samples: int = 10
    n_refine: int = 5
    adam_steps: int = 100
    adam_lr: float = 0.05
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    rho_max: float = RHO_MAX
    rho_init_scale: float = 1.0
    learn_noise: bool = False
    fixed_noise_sq: float = 1e-6
    family: str = MATERN52
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0:
            raise ContractError("lam must be nonnegative")
        if not 1 <= self.n_refine <= self.n_init_samples:
            raise ContractError("need 1 <= n_refine <= n_init_samples")
        if self.adam_steps < 0:
            raise ContractError("adam_steps must be nonnegative")
        for name in ("adam_lr", "adam_eps", "rho_max", "rho_init_scale"):
            if not getattr(self, name) > 0:
                raise ContractError(f"{name} must be positive")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ContractError("ADAM betas must lie in [0, 1)")
        if self.fixed_noise_sq < 0:
            raise ContractError("fixed_noise_sq must be nonnegative")

    def to_dict(self):
        return asdict(self)


class LassoObjective:
    """U and its gradient for a fixed dataset.

    Pairwise squared coordinate differences are cached once, so each
    evaluation costs one Cholesky factorization plus two matrix-vector
    products over the ``N (N - 1) / 2`` point pairs.

    ``y`` is used as given; standardize beforehand if desired.
    """

    def __init__(self, X, y, lam, family=MATERN52):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).reshape(-1)
        if X.shape[0] == 0:
            raise ContractError("empty dataset")
        if X.shape[0] != y.shape[0]:
            raise ContractError("inputs and outputs must have the same length")
        if lam < 0:
            raise ContractError("lam must be nonnegative")
        self.X, self.y, self.lam, self.family = X, y, float(lam), family
        n = X.shape[0]
        self._iu = np.triu_indices(n, k=1)
        diff = X[self._iu[0]] - X[self._iu[1]]
        self._sq = diff * diff  # (pairs, D)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]

    def _factor(self, rho, sigma_k_sq, noise_sq):
        r2 = np.maximum(self._sq @ rho, 0.0)
        kp = kernel_from_r2(self.family, sigma_k_sq, r2)
        A = np.empty((self.n, self.n))
        A[self._iu] = kp
        A[self._iu[1], self._iu[0]] = kp
        A[np.diag_indices(self.n)] = sigma_k_sq + noise_sq
        L, _ = safe_cholesky(A)
        return L, r2, kp

    def value(self, rho, sigma_k_sq, noise_sq):
        rho = np.asarray(rho, dtype=float)
        L, _, _ = self._factor(rho, sigma_k_sq, noise_sq)
        alpha = scipy.linalg.cho_solve((L, True), self.y)
        return (0.5 * self.y @ alpha + np.sum(np.log(np.diag(L)))
                + 0.5 * self.n * _LOG_2PI + self.lam * np.sum(rho))

    def value_and_grad(self, rho, sigma_k_sq, noise_sq):
        """Return ``(U, d_rho, d_sigma_k_sq, d_noise_sq)``."""
        rho = np.asarray(rho, dtype=float)
        L, r2, kp = self._factor(rho, sigma_k_sq, noise_sq)
        alpha = scipy.linalg.cho_solve((L, True), self.y)
        value = (0.5 * self.y @ alpha + np.sum(np.log(np.diag(L)))
                 + 0.5 * self.n * _LOG_2PI + self.lam * np.sum(rho))
        # lower triangle of A^-1 straight from the factor
        A_inv, info = scipy.linalg.lapack.dpotri(L, lower=1)
        if info != 0:
            raise NumericalError("inversion from Cholesky factor failed")
        i, j = self._iu
        # W = alpha alpha^T - A^-1 on the upper pairs and on the diagonal
        w_pairs = alpha[i] * alpha[j] - A_inv[j, i]
        w_diag = alpha * alpha - np.diag(A_inv)
        # dU/dtheta = -1/2 tr(W dA/dtheta); off-diagonal pairs count twice
        d_rho = -(w_pairs * kernel_dr2(self.family, sigma_k_sq, r2)) @ self._sq + self.lam
        d_sk = -(2.0 * w_pairs @ kp + sigma_k_sq * np.sum(w_diag)) / (2.0 * sigma_k_sq)
        d_noise = -0.5 * np.sum(w_diag)
        return float(value), d_rho, float(d_sk), float(d_noise)


def neg_log_marginal_lasso(params, data, lam):
    """U at ``params`` on ``data`` (outputs used as given)."""
    obj = LassoObjective(data.inputs, data.outputs, lam, params.family)
    if obj.dim != params.dim:
        raise ContractError("dimension mismatch")
    return float(obj.value(params.rho, params.sigma_k_sq, params.noise_sq))


def grad_neg_log_marginal_lasso(params, data, lam, learn_noise=False):
    """Gradient of U as ``(d_rho, d_sigma_k_sq)`` or, with ``learn_noise``,
    ``(d_rho, d_sigma_k_sq, d_noise_sq)``."""
    obj = LassoObjective(data.inputs, data.outputs, lam, params.family)
    if obj.dim != params.dim:
        raise ContractError("dimension mismatch")
    _, d_rho, d_sk, d_noise = obj.value_and_grad(
        params.rho, params.sigma_k_sq, params.noise_sq)
    if learn_noise:
        return d_rho, d_sk, d_noise
    return d_rho, d_sk


class _Adam:
    def __init__(self, size, cfg):
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0
        self.cfg = cfg

    def step(self, grad):
        c = self.cfg
        self.t += 1
        self.m = c.adam_beta1 * self.m + (1 - c.adam_beta1) * grad
        self.v = c.adam_beta2 * self.v + (1 - c.adam_beta2) * grad * grad
        m_hat = self.m / (1 - c.adam_beta1 ** self.t)
        v_hat = self.v / (1 - c.adam_beta2 ** self.t)
        return c.adam_lr * m_hat / (np.sqrt(v_hat) + c.adam_eps)


def _refine(obj, rho, sigma_k_sq, noise_sq, cfg):
    """Projected ADAM on (rho, log sigma_k_sq [, log noise_sq]).

    Returns the best iterate seen, which is never worse than the start.
    """
    rho = rho.copy()
    log_sk = np.log(sigma_k_sq)
    log_noise = np.log(max(noise_sq, 1e-12))
    n_extra = 2 if cfg.learn_noise else 1
    adam = _Adam(obj.dim + n_extra, cfg)
    best = None
    for step in range(cfg.adam_steps + 1):
        sk = float(np.clip(np.exp(log_sk), SIGMA_K_SQ_MIN, SIGMA_K_SQ_MAX))
        nz = float(np.exp(log_noise)) if cfg.learn_noise else noise_sq
        try:
            val, d_rho, d_sk, d_noise = obj.value_and_grad(rho, sk, nz)
        except NumericalError:
            break
        if best is None or val < best[0]:
            best = (val, rho.copy(), sk, nz)
        if step == cfg.adam_steps:
            break
        grad = np.empty(obj.dim + n_extra)
        grad[:obj.dim] = d_rho
        grad[obj.dim] = d_sk * sk  # chain rule through log
        if cfg.learn_noise:
            grad[obj.dim + 1] = d_noise * nz
        upd = adam.step(grad)
        rho = np.clip(rho - upd[:obj.dim], 0.0, cfg.rho_max)
        log_sk = np.clip(log_sk - upd[obj.dim], np.log(SIGMA_K_SQ_MIN), np.log(SIGMA_K_SQ_MAX))
        if cfg.learn_noise:
            log_noise = np.clip(log_noise - upd[obj.dim + 1], np.log(1e-10), np.log(1.0))
    return best


def fit_hyperparams(data, cfg=None, warm_start=None):
    """Multi-start projected-ADAM minimization of the penalized likelihood.

    Parameters
    ----------
    data : Dataset
        Raw observations; outputs are standardized internally.
    cfg : FitConfig
    warm_start : KernelHyperparams, optional
        Replaces the first random candidate.

    Returns
    -------
    (KernelHyperparams, float)
        The fitted hyperparameters and their objective value.
    """
    cfg = cfg or FitConfig()
    if len(data) == 0:
        raise ContractError("cannot fit hyperparameters to an empty dataset")
    y_std, _, _ = standardize(data.outputs)
    obj = LassoObjective(data.inputs, y_std, cfg.lam, cfg.family)
    rng = np.random.default_rng(cfg.seed)

    D = obj.dim
    rhos = np.minimum(cfg.rho_init_scale * rng.standard_exponential((cfg.n_init_samples, D)),
                      cfg.rho_max)
    sks = rng.uniform(0.1, SIGMA_K_SQ_MAX, cfg.n_init_samples)
    noises = np.full(cfg.n_init_samples, cfg.fixed_noise_sq)
    if warm_start is not None:
        if warm_start.dim != D:
            raise ContractError("warm start has the wrong dimension")
        rhos[0] = np.clip(warm_start.rho, 0.0, cfg.rho_max)
        sks[0] = np.clip(warm_start.sigma_k_sq, SIGMA_K_SQ_MIN, SIGMA_K_SQ_MAX)
        if cfg.learn_noise:
            noises[0] = warm_start.noise_sq

    scores = np.full(cfg.n_init_samples, np.inf)
    for c in range(cfg.n_init_samples):
        try:
            scores[c] = obj.value(rhos[c], sks[c], noises[c])
        except NumericalError:
            pass
    if not np.any(np.isfinite(scores)):
        raise NumericalError("every hyperparameter candidate failed to factorize")
    # stable sort keeps the lowest candidate index first on exact ties
    order = np.argsort(scores, kind="stable")[:cfg.n_refine]
    best = None
    for c in order:
        if not np.isfinite(scores[c]):
            continue
        res = _refine(obj, rhos[c], sks[c], noises[c], cfg)
        if res is not None and (best is None or res[0] < best[0]):
            best = res
    val, rho, sk, nz = best
    params = KernelHyperparams(rho=rho, sigma_k_sq=sk, noise_sq=nz, family=cfg.family)
    return params, float(val)
