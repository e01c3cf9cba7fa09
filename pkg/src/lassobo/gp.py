"""Kernels and exact Gaussian process posterior inference.

Inputs live on the unit cube and every kernel is parametrized by inverse
squared lengthscales ``rho`` (one per coordinate), a signal variance
``sigma_k_sq`` and an observation-noise variance ``noise_sq``.

Two kernel families are supported::

    SE        k(x, x') = s * exp(-r^2 / 2)
    Matern52  k(x, x') = s * (1 + sqrt(5) r + 5 r^2 / 3) * exp(-sqrt(5) r)

with ``r^2 = sum_i rho_i (x_i - x'_i)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

SE = "se"
MATERN52 = "matern52"
FAMILIES = (SE, MATERN52)

RHO_MAX = 1e4
SIGMA_K_SQ_MAX = 1e2

# jitter levels tried, in order, after a plain factorization fails
JITTER_LEVELS = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4)

_SQRT5 = np.sqrt(5.0)


class ContractError(ValueError):
    """Raised when an argument violates an operation's preconditions."""


class NumericalError(np.linalg.LinAlgError):
    """Raised when a Gram matrix stays indefinite after maximal jitter."""

    def __init__(self, message, jitters=()):
        super().__init__(message)
        self.jitters = tuple(jitters)


def parse_family(name):
    """Normalize a kernel family name (``"se"``, ``"matern52"``, ...)."""
    key = str(name).lower().replace("-", "").replace("_", "").replace(" ", "")
    aliases = {
        "se": SE,
        "squaredexponential": SE,
        "rbf": SE,
        "matern52": MATERN52,
        "matern": MATERN52,
        "matern2.5": MATERN52,
        "matern5/2": MATERN52,
    }
    if key not in aliases:
        raise ContractError(
            f"unsupported kernel family {name!r}; only SE and Matern 5/2 are implemented"
        )
    return aliases[key]


@dataclass(frozen=True)
class KernelHyperparams:
    """Kernel family plus its hyperparameters.

    Parameters
    ----------
    rho : array_like, shape (D,)
        Inverse squared lengthscales, each in ``[0, RHO_MAX]``.
    sigma_k_sq : float
        Signal variance, in ``(0, 100]``.
    noise_sq : float
        Observation-noise variance.
    family : str
        ``"se"`` or ``"matern52"``.
    """

    rho: np.ndarray
    sigma_k_sq: float = 1.0
    noise_sq: float = 1e-6
    family: str = MATERN52

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float).reshape(-1)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "family", parse_family(self.family))
        object.__setattr__(self, "sigma_k_sq", float(self.sigma_k_sq))
        object.__setattr__(self, "noise_sq", float(self.noise_sq))
        if not np.all(np.isfinite(rho)) or np.any(rho < 0):
            raise ContractError("rho must be finite and nonnegative")
        if np.any(rho > RHO_MAX * (1 + 1e-12)):
            raise ContractError(f"rho exceeds the cap {RHO_MAX:g}")
        if not 0 < self.sigma_k_sq <= SIGMA_K_SQ_MAX:
            raise ContractError("sigma_k_sq must lie in (0, 100]")
        if not self.noise_sq >= 0:
            raise ContractError("noise_sq must be nonnegative")

    @property
    def dim(self):
        return self.rho.shape[0]

    def replace(self, **changes):
        kw = dict(rho=self.rho, sigma_k_sq=self.sigma_k_sq,
                  noise_sq=self.noise_sq, family=self.family)
        kw.update(changes)
        return KernelHyperparams(**kw)


@dataclass
class Dataset:
    """Observed ``(x, y)`` pairs with ``x`` in the unit cube.

    ``best_index`` points at the largest output (lowest index on ties).
    """

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.asarray(self.outputs, dtype=float).reshape(-1)
        if X.size == 0:
            X = X.reshape(0, X.shape[-1] if X.ndim == 2 else 0)
        if X.shape[0] != y.shape[0]:
            raise ContractError("inputs and outputs must have the same length")
        if X.size and (np.any(X < 0) or np.any(X > 1) or not np.all(np.isfinite(X))):
            raise ContractError("inputs must lie in [0, 1]^D")
        self.inputs = X
        self.outputs = y

    @classmethod
    def empty(cls, dim):
        return cls(np.zeros((0, dim)), np.zeros(0))

    def __len__(self):
        return self.outputs.shape[0]

    @property
    def dim(self):
        return self.inputs.shape[1]

    @property
    def best_index(self):
        if len(self) == 0:
            raise ContractError("empty dataset has no incumbent")
        return int(np.argmax(self.outputs))

    @property
    def best_x(self):
        return self.inputs[self.best_index].copy()

    @property
    def best_y(self):
        return float(self.outputs[self.best_index])

    def add(self, x, y):
        """Append one observation in place."""
        x = np.asarray(x, dtype=float).reshape(1, -1)
        if x.shape[1] != self.dim:
            raise ContractError("dimension mismatch")
        if np.any(x < 0) or np.any(x > 1):
            raise ContractError("inputs must lie in [0, 1]^D")
        self.inputs = np.vstack([self.inputs, x])
        self.outputs = np.append(self.outputs, float(y))


def standardize(y):
    """Return ``(y_std, shift, scale)``; scale is 1 for fewer than 2 points or zero spread."""
    y = np.asarray(y, dtype=float)
    shift = float(np.mean(y)) if y.size else 0.0
    scale = float(np.std(y)) if y.size > 1 else 1.0
    if not scale > 0:
        scale = 1.0
    return (y - shift) / scale, shift, scale


# ---------------------------------------------------------------------------
# kernels


def _check_dims(params, *arrays):
    for a in arrays:
        if a.shape[-1] != params.dim:
            raise ContractError(
                f"dimension mismatch: got {a.shape[-1]}, kernel has {params.dim}"
            )


def scaled_sqdist(rho, X1, X2):
    """``r^2`` between every row of ``X1`` and ``X2``, shape (n1, n2)."""
    diff = X1[:, None, :] - X2[None, :, :]
    return np.maximum((diff * diff) @ rho, 0.0)


def kernel_from_r2(family, sigma_k_sq, r2):
    if family == SE:
        return sigma_k_sq * np.exp(-0.5 * r2)
    r = np.sqrt(r2)
    return sigma_k_sq * (1.0 + _SQRT5 * r + (5.0 / 3.0) * r2) * np.exp(-_SQRT5 * r)


def kernel_dr2(family, sigma_k_sq, r2):
    """Derivative of the kernel with respect to ``r^2``."""
    if family == SE:
        return -0.5 * sigma_k_sq * np.exp(-0.5 * r2)
    r = np.sqrt(r2)
    return -(5.0 / 6.0) * sigma_k_sq * (1.0 + _SQRT5 * r) * np.exp(-_SQRT5 * r)


def kernel_eval(params, x, x_prime):
    """Kernel value between two points."""
    x = np.asarray(x, dtype=float).reshape(-1)
    xp = np.asarray(x_prime, dtype=float).reshape(-1)
    _check_dims(params, x, xp)
    d = x - xp
    r2 = max(float(np.dot(params.rho, d * d)), 0.0)
    return float(kernel_from_r2(params.family, params.sigma_k_sq, r2))


def kernel_matrix(params, X1, X2=None):
    """Cross-covariance matrix ``k(X1, X2)``; ``X2`` defaults to ``X1``."""
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    X2 = X1 if X2 is None else np.atleast_2d(np.asarray(X2, dtype=float))
    _check_dims(params, X1, X2)
    return kernel_from_r2(params.family, params.sigma_k_sq,
                          scaled_sqdist(params.rho, X1, X2))


def safe_cholesky(A):
    """Lower Cholesky factor of ``A``, escalating diagonal jitter on failure.

    Returns ``(L, jitter)`` where ``jitter`` is the amount actually added.
    """
    try:
        return np.linalg.cholesky(A), 0.0
    except np.linalg.LinAlgError:
        pass
    tried = [0.0]
    eye = np.eye(A.shape[0])
    for jitter in JITTER_LEVELS:
        tried.append(jitter)
        try:
            return np.linalg.cholesky(A + jitter * eye), jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(
        f"matrix not positive definite after jitter up to {JITTER_LEVELS[-1]:g}",
        jitters=tried,
    )


# ---------------------------------------------------------------------------
# posterior


@dataclass(frozen=True)
class PosteriorModel:
    """Fitted GP state. Build with :func:`fit_posterior`."""

    hyperparams: KernelHyperparams
    train_inputs: np.ndarray
    factor: np.ndarray
    alpha: np.ndarray
    y_shift: float
    y_scale: float
    jitter: float = 0.0
    _inv: np.ndarray = field(default=None, repr=False)

    @property
    def dim(self):
        return self.hyperparams.dim

    def _as_batch(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        _check_dims(self.hyperparams, X)
        return X, single

    def predict(self, x):
        """Posterior mean and variance at ``x`` (one point or a batch of rows)."""
        X, single = self._as_batch(x)
        p = self.hyperparams
        Ks = kernel_matrix(p, X, self.train_inputs)
        mean = self.y_shift + self.y_scale * (Ks @ self.alpha)
        v = scipy.linalg.solve_triangular(self.factor, Ks.T, lower=True)
        var = p.sigma_k_sq - np.einsum("ij,ij->j", v, v)
        var = np.clip(var, 0.0, p.sigma_k_sq) * self.y_scale ** 2
        if single:
            return float(mean[0]), float(var[0])
        return mean, var

    def predict_gradient(self, x):
        """Gradients of the posterior mean and standard deviation at ``x``.

        Where the standard deviation vanishes its gradient is reported as 0.
        """
        X, single = self._as_batch(x)
        p = self.hyperparams
        T = self.train_inputs
        diff = X[:, None, :] - T[None, :, :]
        r2 = np.maximum((diff * diff) @ p.rho, 0.0)
        k = kernel_from_r2(p.family, p.sigma_k_sq, r2)
        # dk/dx = 2 * dk/dr2 * rho * (x - t)
        dk = 2.0 * kernel_dr2(p.family, p.sigma_k_sq, r2)[:, :, None] * diff * p.rho
        d_mean = self.y_scale * np.einsum("nmd,m->nd", dk, self.alpha)
        Ak = k @ self._inv
        var_s = np.clip(p.sigma_k_sq - np.einsum("nm,nm->n", Ak, k), 0.0, None)
        std_s = np.sqrt(var_s)
        d_var_s = -2.0 * np.einsum("nm,nmd->nd", Ak, dk)
        d_std = np.zeros_like(d_var_s)
        ok = std_s > 1e-12
        d_std[ok] = self.y_scale * d_var_s[ok] / (2.0 * std_s[ok, None])
        if single:
            return d_mean[0], d_std[0]
        return d_mean, d_std


def fit_posterior(data, params):
    """Condition a zero-mean GP on standardized outputs of ``data``."""
    if len(data) == 0:
        raise ContractError("cannot fit a posterior to an empty dataset")
    X = data.inputs
    _check_dims(params, X)
    y_std, shift, scale = standardize(data.outputs)
    A = kernel_matrix(params, X)
    A[np.diag_indices_from(A)] += params.noise_sq
    L, jitter = safe_cholesky(A)
    alpha = scipy.linalg.cho_solve((L, True), y_std)
    inv = scipy.linalg.cho_solve((L, True), np.eye(len(data)))
    return PosteriorModel(
        hyperparams=params,
        train_inputs=X.copy(),
        factor=L,
        alpha=alpha,
        y_shift=shift,
        y_scale=scale,
        jitter=jitter,
        _inv=inv,
    )


def predict(model, x):
    return model.predict(x)


def predict_gradient(model, x):
    return model.predict_gradient(x)


def sample_gp_path_1d(params, grid, seed, n_paths=None):
    """Draw zero-mean prior sample paths on a 1-D grid.

    Parameters
    ----------
    params : KernelHyperparams
        Must be one-dimensional.
    grid : array_like, shape (m,)
        Strictly increasing points in ``[0, 1]``, ``m <= 5000``.
    seed : int or numpy.random.Generator
    n_paths : int, optional
        Number of independent paths. ``None`` returns a single path of shape (m,).
    """
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if params.dim != 1:
        raise ContractError("sample_gp_path_1d needs a 1-D kernel")
    if grid.size == 0 or grid.size > 5000:
        raise ContractError("grid must hold between 1 and 5000 points")
    if np.any(np.diff(grid) <= 0) or grid[0] < 0 or grid[-1] > 1:
        raise ContractError("grid must be strictly increasing inside [0, 1]")
    K = kernel_matrix(params, grid[:, None])
    L, _ = safe_cholesky(K)
    rng = np.random.default_rng(seed)
    if n_paths is None:
        return L @ rng.standard_normal(grid.size)
    return (L @ rng.standard_normal((grid.size, n_paths))).T
