"""Property suites behind ``lassobo check``.

Each suite runs with fixed seeds and returns a list of :class:`CheckResult`.
The oracles here are deliberately naive (dense inverses, finite differences,
brute-force Monte Carlo) so that they share no code path with the library
routines they audit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gp import MATERN52, SE, Dataset, KernelHyperparams, fit_posterior, sample_gp_path_1d
from .likelihood import LassoObjective
from .search_space import mt_schedule
from .selection import ImportanceState

FAMILIES = (SE, MATERN52)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  {self.detail}".rstrip()


def _dense_kernel(family, rho, sigma_k_sq, X1, X2):
    diff = X1[:, None, :] - X2[None, :, :]
    r2 = np.einsum("ijk,k->ij", diff * diff, rho)
    if family == SE:
        return sigma_k_sq * np.exp(-0.5 * r2)
    r = np.sqrt(5.0 * r2)
    return sigma_k_sq * (1.0 + r + r * r / 3.0) * np.exp(-r)


def _dense_posterior(family, rho, sigma_k_sq, noise_sq, X, y, Xq):
    n = y.size
    shift = y.mean()
    scale = y.std() if n > 1 else 1.0
    scale = scale if scale > 0 else 1.0
    ys = (y - shift) / scale
    A_inv = np.linalg.inv(_dense_kernel(family, rho, sigma_k_sq, X, X) + noise_sq * np.eye(n))
    Kq = _dense_kernel(family, rho, sigma_k_sq, Xq, X)
    mean = shift + scale * (Kq @ (A_inv @ ys))
    var = sigma_k_sq - np.einsum("ij,jk,ik->i", Kq, A_inv, Kq)
    return mean, np.clip(var, 0.0, sigma_k_sq) * scale ** 2


def _central_diff(f, theta, h=1e-5):
    out = np.empty(theta.size)
    for i in range(theta.size):
        step = h * max(1.0, abs(theta[i]))
        up, dn = theta.copy(), theta.copy()
        up[i] += step
        dn[i] -= step
        out[i] = (f(up) - f(dn)) / (2.0 * step)
    return out


def gradient_suite(n_instances=20, rel_tol=1e-4, abs_tol=1e-6, seed=0):
    """Analytic gradient of the penalized NLL against central differences."""
    rng = np.random.default_rng(seed)
    results = []
    for k in range(n_instances):
        family = FAMILIES[k % 2]
        n, d = int(rng.integers(2, 13)), int(rng.integers(1, 9))
        X, y = rng.random((n, d)), rng.standard_normal(n)
        obj = LassoObjective(X, y, lam=float(rng.uniform(0, 0.1)), family=family)
        theta = np.r_[rng.uniform(0.1, 5.0, d), rng.uniform(0.3, 3.0), rng.uniform(1e-3, 0.2)]

        def f(th):
            return obj.value(th[:d], th[d], th[d + 1])

        _, g_rho, g_sk, g_noise = obj.value_and_grad(theta[:d], theta[d], theta[d + 1])
        analytic = np.r_[g_rho, g_sk, g_noise]
        numeric = _central_diff(f, theta)
        err = np.abs(analytic - numeric) / np.maximum(rel_tol * np.abs(numeric), abs_tol)
        worst = float(err.max()) * rel_tol
        results.append(CheckResult(f"gradient[{k}] {family} N={n} D={d}", bool(np.all(err <= 1.0)),
                                   f"worst scaled error {worst:.2e}"))
    return results


def posterior_suite(n_instances=50, rel_tol=1e-10, seed=0):
    """Posterior mean and variance against a dense-inverse computation."""
    rng = np.random.default_rng(seed)
    results = []
    for k in range(n_instances):
        family = FAMILIES[k % 2]
        n, d = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        rho = rng.exponential(2.0, d)
        s2, n2 = rng.uniform(0.5, 3.0), rng.uniform(1e-3, 0.3)
        X, y = rng.random((n, d)), rng.standard_normal(n)
        Xq = rng.random((5, d))
        model = fit_posterior(Dataset(X, y), KernelHyperparams(rho, s2, n2, family))
        mean, var = model.predict(Xq)
        rm, rv = _dense_posterior(family, rho, s2, n2, X, y, Xq)
        ok = np.allclose(mean, rm, rtol=rel_tol, atol=1e-12) and np.allclose(
            var, rv, rtol=rel_tol, atol=1e-12)
        gap = max(np.max(np.abs(mean - rm)), np.max(np.abs(var - rv)))
        results.append(CheckResult(f"posterior[{k}] {family} N={n}", bool(ok),
                                   f"max abs gap {gap:.1e}"))
    return results


def derivative_variance(family, rho, sigma_k_sq, n_paths=2000, h=1e-3, seed=0):
    """Monte Carlo variance of the slope of 1-D prior paths over a gap ``h``."""
    params = KernelHyperparams([rho], sigma_k_sq, 0.0, family)
    paths = sample_gp_path_1d(params, [0.5, 0.5 + h], seed, n_paths=n_paths)
    slope = (paths[:, 1] - paths[:, 0]) / h
    return float(np.mean(slope ** 2))


def derivative_variance_law(family, rho, sigma_k_sq):
    """Variance of a prior path's derivative: ``c * sigma_k_sq * rho``."""
    return sigma_k_sq * rho * (1.0 if family == SE else 5.0 / 3.0)


def derivative_law_suite(rhos=(0.5, 2.0, 10.0), sigmas=(0.5, 1.0, 4.0), n_paths=2000, tol=0.10, seed=0):
    results = []
    k = 0
    for family in FAMILIES:
        for rho in rhos:
            for s2 in sigmas:
                got = derivative_variance(family, rho, s2, n_paths, seed=seed + k)
                want = derivative_variance_law(family, rho, s2)
                rel = abs(got - want) / want
                results.append(CheckResult(
                    f"derivative variance {family} rho={rho:g} sigma_k^2={s2:g}", rel <= tol,
                    f"MC {got:.4g} vs {want:.4g} ({100 * rel:.1f}%)"))
                k += 1
    return results


def selection_suite(n_random=10_000, seed=0):
    rng = np.random.default_rng(seed)
    results = []
    fallback = all(ImportanceState(5).push_and_classify(np.full(5, c))[0].tolist() == [0]
                   for c in (0.0, 1.0, 3.5))
    results.append(CheckResult("all-equal rho gives fallback singleton", fallback))

    empty = 0
    for _ in range(n_random):
        d = int(rng.integers(1, 40))
        rho = rng.exponential(1.0, d) * (rng.random(d) < 0.5)
        if ImportanceState(d).push_and_classify(rho)[0].size == 0:
            empty += 1
    results.append(CheckResult(f"nonempty selection on {n_random} random rho", empty == 0,
                               f"{empty} empty"))

    perm_ok = True
    for _ in range(200):
        rho = rng.exponential(1.0, 12)
        perm = rng.permutation(12)
        I = ImportanceState(12).push_and_classify(rho)[0]
        J = ImportanceState(12).push_and_classify(rho[perm])[0]
        perm_ok &= sorted(perm[J].tolist()) == I.tolist()
    results.append(CheckResult("permutation equivariance", bool(perm_ok)))

    t = np.arange(1, 10_001)
    m = np.array([mt_schedule(int(v), 3) for v in t])
    sched_ok = bool(np.all((m - 1) ** 3 < t) and np.all(t <= m ** 3))
    results.append(CheckResult("imputation schedule is ceil(t^(1/3)) on [1, 1e4]", sched_ok))
    return results


SUITES = {
    "gradients": gradient_suite,
    "posterior-oracle": posterior_suite,
    "theorem1": derivative_law_suite,
    "selection": selection_suite,
}


def run_suite(name):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name]()
