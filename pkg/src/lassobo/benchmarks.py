"""Synthetic test functions padded with dummy dimensions.

All objectives are posed for maximization on ``[0, 1]^D``: the effective
coordinates are mapped affinely onto the function's usual domain and the
classic minimization problems are negated. Coordinates outside
``effective_indices`` are ignored.

Registry ids look like ``levy-d300-e15``, ``ackley-d300-e15``,
``hartmann6-d300`` and ``sumsq-d50-e8``; an optional ``-s<seed>`` suffix
scatters the effective coordinates with a seeded permutation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .gp import ContractError

HARTMANN6_A = np.array([
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
])
HARTMANN6_P = 1e-4 * np.array([
    [1312, 1696, 5569, 124, 8283, 5886],
    [2329, 4135, 8307, 3736, 1004, 9991],
    [2348, 1451, 3522, 2883, 3047, 6650],
    [4047, 8828, 8732, 5743, 1091, 381],
])
HARTMANN6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
HARTMANN6_XSTAR = np.array([0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573])
# value of the closed form at HARTMANN6_XSTAR, computed in 50-digit arithmetic
HARTMANN6_FMAX = 3.3223680113913385


def ackley(z, a=20.0, b=0.2, c=2.0 * np.pi):
    """Ackley function (minimum 0 at the origin), rows of ``z`` are points."""
    z = np.atleast_2d(z)
    d = z.shape[1]
    s1 = np.sqrt(np.sum(z * z, axis=1) / d)
    s2 = np.sum(np.cos(c * z), axis=1) / d
    return -a * np.exp(-b * s1) - np.exp(s2) + a + np.e


def levy(z):
    """Levy function (minimum 0 at the all-ones point)."""
    z = np.atleast_2d(z)
    w = 1.0 + (z - 1.0) / 4.0
    head = np.sin(np.pi * w[:, 0]) ** 2
    mid = np.sum((w[:, :-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:, :-1] + 1.0) ** 2),
                 axis=1)
    tail = (w[:, -1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[:, -1]) ** 2)
    return head + mid + tail


def hartmann6(z):
    """Hartmann 6-D function, returned with the maximization sign (peak ~3.32237)."""
    z = np.atleast_2d(z)
    inner = np.sum(HARTMANN6_A[None] * (z[:, None, :] - HARTMANN6_P[None]) ** 2, axis=2)
    return np.exp(-inner) @ HARTMANN6_ALPHA


def sum_squares(z, alpha):
    z = np.atleast_2d(z)
    return (z * z) @ alpha


def default_sumsq_alpha(d_e, seed=0, low=0.1, high=10.0):
    """Log-spaced coefficients in ``[low, high]``, shuffled by ``seed``."""
    alpha = np.geomspace(low, high, d_e)
    if seed is not None:
        alpha = np.random.default_rng(seed).permutation(alpha)
    return alpha


_DOMAINS = {
    "ackley": (-32.768, 32.768),
    "levy": (-10.0, 10.0),
    "hartmann6": (0.0, 1.0),
    "sumsq": (0.0, 1.0),
}


@dataclass(frozen=True)
class PaddedObjective:
    """A low-dimensional test function embedded in ``[0, 1]^D``.

    Parameters
    ----------
    base : {"levy", "ackley", "hartmann6", "sumsq"}
    dim : int
        Total dimension ``D``.
    d_e : int
        Number of effective coordinates (fixed to 6 for Hartmann).
    effective_indices : array_like, optional
        Where the effective coordinates sit; defaults to ``0..d_e-1``.
    alpha : array_like, optional
        SumSquares coefficients.
    noise_sd : float
        Standard deviation of additive Gaussian observation noise.
    """

    base: str
    dim: int
    d_e: int
    effective_indices: np.ndarray = None
    alpha: np.ndarray = None
    noise_sd: float = 0.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.base not in _DOMAINS:
            raise ContractError(f"unknown benchmark base {self.base!r}")
        if self.base == "hartmann6" and self.d_e != 6:
            raise ContractError("Hartmann6 has exactly 6 effective dimensions")
        if not 1 <= self.d_e <= self.dim:
            raise ContractError("need 1 <= d_e <= D")
        eff = (np.arange(self.d_e) if self.effective_indices is None
               else np.asarray(self.effective_indices, dtype=int).reshape(-1))
        if eff.size != self.d_e or len(set(eff.tolist())) != self.d_e:
            raise ContractError("effective_indices must hold d_e distinct indices")
        if eff.min() < 0 or eff.max() >= self.dim:
            raise ContractError("effective index out of range")
        eff.setflags(write=False)
        object.__setattr__(self, "effective_indices", eff)
        if self.base == "sumsq":
            alpha = (default_sumsq_alpha(self.d_e) if self.alpha is None
                     else np.asarray(self.alpha, dtype=float).reshape(-1))
            if alpha.size != self.d_e or np.any(alpha <= 0):
                raise ContractError("SumSquares needs d_e positive coefficients")
            alpha.setflags(write=False)
            object.__setattr__(self, "alpha", alpha)
        if self.noise_sd < 0:
            raise ContractError("noise_sd must be nonnegative")
        if not self.name:
            object.__setattr__(self, "name", f"{self.base}-d{self.dim}-e{self.d_e}")

    @property
    def f_max(self):
        return HARTMANN6_FMAX if self.base == "hartmann6" else 0.0

    def _to_domain(self, x):
        lo, hi = _DOMAINS[self.base]
        return lo + (hi - lo) * x[:, self.effective_indices]

    def _from_domain(self, z):
        lo, hi = _DOMAINS[self.base]
        return (np.asarray(z, dtype=float) - lo) / (hi - lo)

    def value(self, x):
        """Noiseless objective for one point or a batch of rows."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if X.shape[1] != self.dim:
            raise ContractError(f"expected {self.dim} coordinates, got {X.shape[1]}")
        if np.any(X < 0) or np.any(X > 1) or not np.all(np.isfinite(X)):
            raise ContractError("inputs must lie in [0, 1]^D")
        z = self._to_domain(X)
        if self.base == "ackley":
            f = -ackley(z)
        elif self.base == "levy":
            f = -levy(z)
        elif self.base == "hartmann6":
            f = hartmann6(z)
        else:
            f = -sum_squares(z, self.alpha)
        return float(f[0]) if single else f

    def evaluate(self, x, rng=None):
        """Objective value plus optional Gaussian noise drawn from ``rng``."""
        f = self.value(x)
        if self.noise_sd > 0:
            if rng is None:
                raise ContractError("noisy evaluation needs an explicit rng")
            f = f + self.noise_sd * np.random.default_rng(rng).standard_normal(np.shape(f))
        return f

    __call__ = evaluate

    def optimum(self):
        """``(f_max, x_star_effective)`` with the optimizer mapped into ``[0, 1]``."""
        if self.base == "ackley":
            z = np.zeros(self.d_e)
        elif self.base == "levy":
            z = np.ones(self.d_e)
        elif self.base == "hartmann6":
            z = HARTMANN6_XSTAR.copy()
        else:
            z = np.zeros(self.d_e)
        return self.f_max, self._from_domain(z)

    def embed(self, x_effective, fill=0.5):
        """Full ``D``-vector with ``x_effective`` in place and ``fill`` elsewhere."""
        x = np.full(self.dim, float(fill))
        x[self.effective_indices] = x_effective
        return x


def evaluate(obj, x, rng=None):
    return obj.evaluate(x, rng)


def optimum(obj):
    return obj.optimum()


def rho_alpha_correlation(fitted_rho, alpha, effective_indices):
    """Pearson correlation of ``sqrt(rho)`` on the effective coordinates with ``alpha``."""
    s = np.sqrt(np.asarray(fitted_rho, dtype=float)[np.asarray(effective_indices, dtype=int)])
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if s.shape != alpha.shape:
        raise ContractError("alpha and effective_indices must have the same length")
    if np.std(s) == 0 or np.std(alpha) == 0:
        raise ContractError("correlation undefined for a constant input")
    return float(np.corrcoef(s, alpha)[0, 1])


_ID = re.compile(
    r"^(?P<base>levy|ackley|hartmann6|sumsq)-d(?P<D>\d+)(?:-e(?P<de>\d+))?(?:-s(?P<seed>\d+))?$"
)

REGISTRY_EXAMPLES = ("levy-d300-e15", "ackley-d300-e15", "hartmann6-d300",
                     "sumsq-d50-e8", "levy-d60-e10", "levy-d60-e15")


def make_benchmark(bench_id, noise_sd=0.0):
    """Build a :class:`PaddedObjective` from a registry id."""
    m = _ID.match(str(bench_id).strip().lower())
    if m is None:
        raise KeyError(f"unknown benchmark id {bench_id!r}")
    base, D = m["base"], int(m["D"])
    if base == "hartmann6":
        if m["de"] is not None and int(m["de"]) != 6:
            raise KeyError("hartmann6 ids take no effective-dimension other than 6")
        d_e = 6
    elif m["de"] is None:
        raise KeyError(f"benchmark id {bench_id!r} needs an -e<d_e> part")
    else:
        d_e = int(m["de"])
    eff = None
    if m["seed"] is not None:
        eff = np.sort(np.random.default_rng(int(m["seed"])).permutation(D)[:d_e])
    try:
        return PaddedObjective(base, D, d_e, effective_indices=eff,
                               noise_sd=noise_sd, name=str(bench_id))
    except ContractError as err:
        raise KeyError(str(err)) from None
