import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lassobo.gp import (
    MATERN52,
    SE,
    ContractError,
    Dataset,
    KernelHyperparams,
    NumericalError,
    fit_posterior,
    kernel_eval,
    kernel_matrix,
    safe_cholesky,
    sample_gp_path_1d,
)

from oracles import posterior_ref


def test_se_zero_distance():
    p = KernelHyperparams(rho=[0.3, 7.0], sigma_k_sq=1.0, family=SE)
    assert kernel_eval(p, [0.2, 0.4], [0.2, 0.4]) == 1.0


def test_se_closed_form():
    p = KernelHyperparams(rho=[2.0], family=SE)
    assert kernel_eval(p, [0.0], [1.0]) == pytest.approx(math.exp(-1), rel=1e-15)


def test_se_inert_dimension():
    p = KernelHyperparams(rho=[0.0, 5.0], family=SE)
    assert kernel_eval(p, [0.9, 0.3], [0.1, 0.3]) == 1.0


def test_matern_closed_form():
    import mpmath as mp

    mp.mp.dps = 30
    want = float((1 + mp.sqrt(5) + mp.mpf(5) / 3) * mp.e ** (-mp.sqrt(5)))
    p = KernelHyperparams(rho=[1.0], family=MATERN52)
    assert kernel_eval(p, [0.0], [1.0]) == pytest.approx(want, rel=1e-14)


def test_kernel_contract_errors():
    p = KernelHyperparams(rho=[1.0, 1.0])
    with pytest.raises(ContractError):
        kernel_eval(p, [0.1], [0.2])
    with pytest.raises(ContractError):
        KernelHyperparams(rho=[-1.0])
    with pytest.raises(ContractError):
        KernelHyperparams(rho=[1.0], sigma_k_sq=0.0)
    with pytest.raises(ContractError):
        KernelHyperparams(rho=[1.0], family="matern32")


@pytest.mark.parametrize("family", [SE, MATERN52])
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_kernel_symmetry_and_psd(family, seed):
    rng = np.random.default_rng(seed)
    p = KernelHyperparams(rho=rng.exponential(3.0, 4), sigma_k_sq=rng.uniform(0.1, 5), family=family)
    x, xp = rng.random(4), rng.random(4)
    assert kernel_eval(p, x, xp) == kernel_eval(p, xp, x)
    K = kernel_matrix(p, rng.random((10, 4)))
    assert np.linalg.eigvalsh(K).min() >= -1e-8 * np.trace(K)


@pytest.mark.parametrize("family", [SE, MATERN52])
def test_kernel_monotone_in_rho(family):
    x, xp = np.array([0.2, 0.5]), np.array([0.7, 0.5])
    vals = [kernel_eval(KernelHyperparams(rho=[r, 3.0], family=family), x, xp)
            for r in np.linspace(0, 50, 101)]
    assert np.all(np.diff(vals) <= 0)


def test_single_point_noiseless_interpolates():
    p = KernelHyperparams(rho=[2.0, 1.0], sigma_k_sq=1.0, noise_sq=0.0, family=SE)
    m = fit_posterior(Dataset([[0.3, 0.6]], [1.7]), p)
    mean, var = m.predict([0.3, 0.6])
    assert mean == pytest.approx(1.7, abs=1e-12)
    assert var == pytest.approx(0.0, abs=1e-12)


def test_single_point_noisy_closed_form():
    s2, n2, y1 = 1.5, 0.25, -0.4
    p = KernelHyperparams(rho=[2.0], sigma_k_sq=s2, noise_sq=n2, family=SE)
    m = fit_posterior(Dataset([[0.5]], [y1]), p)
    mean, var = m.predict([0.5])
    # one point: ybar = y1 and the output scale is 1
    assert mean == pytest.approx(y1 + (y1 - y1) * s2 / (s2 + n2))
    assert var == pytest.approx(s2 - s2 ** 2 / (s2 + n2), rel=1e-12)


@pytest.mark.parametrize("family", [SE, MATERN52])
def test_posterior_matches_dense_oracle(family):
    rng = np.random.default_rng(11)
    for _ in range(10):
        n = int(rng.integers(1, 7))
        rho = rng.exponential(2.0, 2)
        s2, n2 = rng.uniform(0.5, 3), rng.uniform(1e-3, 0.3)
        X, y = rng.random((n, 2)), rng.standard_normal(n)
        m = fit_posterior(Dataset(X, y), KernelHyperparams(rho, s2, n2, family))
        for xq in rng.random((4, 2)):
            mean, var = m.predict(xq)
            rm, rv = posterior_ref(family, rho, s2, n2, X.tolist(), y.tolist(), xq.tolist())
            assert mean == pytest.approx(rm, rel=1e-10, abs=1e-12)
            assert var == pytest.approx(rv, rel=1e-10, abs=1e-12)


def test_prior_recovery_far_from_data():
    p = KernelHyperparams(rho=[1e4, 1e4], sigma_k_sq=2.0, noise_sq=1e-6, family=SE)
    y = np.array([1.0, 3.0, 2.0])
    m = fit_posterior(Dataset([[0.0, 0.0], [0.05, 0.0], [0.0, 0.05]], y), p)
    mean, var = m.predict([1.0, 1.0])
    assert mean == pytest.approx(y.mean())
    assert var == pytest.approx(2.0 * y.std() ** 2)
    d_mean, _ = m.predict_gradient([1.0, 1.0])
    assert np.allclose(d_mean, 0.0)


def test_variance_bounded_by_prior():
    rng = np.random.default_rng(3)
    p = KernelHyperparams(rho=[3.0, 0.5, 8.0], sigma_k_sq=1.3, noise_sq=1e-4)
    X, y = rng.random((8, 3)), rng.standard_normal(8)
    m = fit_posterior(Dataset(X, y), p)
    _, var = m.predict(rng.random((200, 3)))
    assert np.all(var >= 0)
    assert np.all(var <= 1.3 * m.y_scale ** 2 + 1e-10)


@pytest.mark.parametrize("family", [SE, MATERN52])
def test_adding_data_never_increases_variance(family):
    rng = np.random.default_rng(5)
    p = KernelHyperparams(rho=[4.0, 1.0], sigma_k_sq=1.0, noise_sq=1e-3, family=family)
    X = rng.random((6, 2))
    probes = rng.random((20, 2))
    # compare in standardized units: fix outputs to avoid rescaling effects
    y = np.ones(6)
    prev = None
    for n in range(1, 7):
        m = fit_posterior(Dataset(X[:n], y[:n]), p)
        _, var = m.predict(probes)
        var = var / m.y_scale ** 2
        if prev is not None:
            assert np.all(var <= prev + 1e-8)
        prev = var


def test_gradient_one_point_se_closed_form():
    rho, x1, y1 = 3.0, 0.2, 2.0
    p = KernelHyperparams(rho=[rho], sigma_k_sq=1.0, noise_sq=0.1, family=SE)
    # two points so the standardized outputs are not all zero
    X = np.array([[x1], [0.9]])
    m = fit_posterior(Dataset(X, [y1, -1.0]), p)
    x = 0.5
    k = np.array([kernel_eval(p, [x], xi) for xi in X])
    dk = -rho * (x - X[:, 0]) * k
    d_mean, _ = m.predict_gradient([x])
    assert d_mean[0] == pytest.approx(m.y_scale * dk @ m.alpha, rel=1e-12)


def test_gradient_single_observation():
    rho, x1, y1, s2, n2 = 3.0, 0.2, 2.0, 1.0, 0.1
    p = KernelHyperparams(rho=[rho], sigma_k_sq=s2, noise_sq=n2, family=SE)
    m = fit_posterior(Dataset([[x1]], [y1]), p)
    x = 0.6
    # standardized single output is 0, so the mean is flat at y1
    d_mean, d_std = m.predict_gradient([x])
    assert d_mean[0] == pytest.approx((y1 - y1) * (-rho * (x - x1)) / (s2 + n2), abs=1e-15)
    k = kernel_eval(p, [x], [x1])
    var = s2 - k * k / (s2 + n2)
    want = -(k / (s2 + n2)) * (-rho * (x - x1) * k) / math.sqrt(var)
    assert d_std[0] == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("family", [SE, MATERN52])
def test_predict_gradient_finite_differences(family):
    rng = np.random.default_rng(17)
    D = 3
    p = KernelHyperparams(rho=rng.uniform(0.5, 6, D), sigma_k_sq=1.2, noise_sq=1e-4, family=family)
    X, y = rng.random((5, D)), rng.standard_normal(5)
    m = fit_posterior(Dataset(X, y), p)
    h = 1e-6
    for x in rng.uniform(0.05, 0.95, (20, D)):
        d_mean, d_std = m.predict_gradient(x)
        for i in range(D):
            e = np.zeros(D)
            e[i] = h
            mp, vp = m.predict(x + e)
            mm, vm = m.predict(x - e)
            fd_mean = (mp - mm) / (2 * h)
            fd_std = (math.sqrt(vp) - math.sqrt(vm)) / (2 * h)
            assert d_mean[i] == pytest.approx(fd_mean, rel=1e-4, abs=1e-7)
            assert d_std[i] == pytest.approx(fd_std, rel=1e-4, abs=1e-7)


def test_matern_gradient_at_training_point_is_finite():
    p = KernelHyperparams(rho=[2.0, 2.0], family=MATERN52, noise_sq=1e-3)
    X = np.array([[0.2, 0.3], [0.7, 0.8]])
    m = fit_posterior(Dataset(X, [0.0, 1.0]), p)
    d_mean, d_std = m.predict_gradient(X[0])
    assert np.all(np.isfinite(d_mean)) and np.all(np.isfinite(d_std))


def test_batch_predict_matches_single():
    rng = np.random.default_rng(2)
    p = KernelHyperparams(rho=[1.0, 2.0], noise_sq=1e-3)
    m = fit_posterior(Dataset(rng.random((7, 2)), rng.standard_normal(7)), p)
    Q = rng.random((5, 2))
    mean, var = m.predict(Q)
    for q, a, b in zip(Q, mean, var):
        sa, sb = m.predict(q)
        assert sa == pytest.approx(a, rel=1e-12) and sb == pytest.approx(b, rel=1e-10, abs=1e-14)


def test_factor_reconstructs_gram():
    rng = np.random.default_rng(4)
    p = KernelHyperparams(rho=rng.uniform(0, 4, 3), noise_sq=1e-2)
    X = rng.random((9, 3))
    m = fit_posterior(Dataset(X, rng.standard_normal(9)), p)
    A = kernel_matrix(p, X) + p.noise_sq * np.eye(9)
    L = m.factor
    assert np.linalg.norm(L @ L.T - A) <= 1e-8 * np.linalg.norm(A)


def test_duplicate_points_trigger_jitter():
    p = KernelHyperparams(rho=[1.0], noise_sq=0.0, family=SE)
    m = fit_posterior(Dataset([[0.5], [0.5], [0.5]], [1.0, 2.0, 3.0]), p)
    assert m.jitter > 0


def test_safe_cholesky_gives_up():
    A = -np.eye(3)
    with pytest.raises(NumericalError) as info:
        safe_cholesky(A)
    assert info.value.jitters[-1] == 1e-4


def test_dataset_contract():
    with pytest.raises(ContractError):
        Dataset([[0.2, 1.5]], [1.0])
    with pytest.raises(ContractError):
        Dataset([[0.2, 0.5]], [1.0, 2.0])
    d = Dataset([[0.1], [0.2], [0.3]], [1.0, 5.0, 5.0])
    assert d.best_index == 1
    with pytest.raises(ContractError):
        fit_posterior(Dataset.empty(2), KernelHyperparams(rho=[1.0, 1.0]))


def test_sample_path_zero_rho_is_constant():
    p = KernelHyperparams(rho=[0.0], sigma_k_sq=1.0)
    path = sample_gp_path_1d(p, np.linspace(0, 1, 50), seed=3)
    assert np.ptp(path) < 1e-3


def test_sample_path_deterministic_and_marginal_variance():
    p = KernelHyperparams(rho=[2.0], sigma_k_sq=1.7, family=SE)
    grid = np.linspace(0.1, 0.9, 5)
    a = sample_gp_path_1d(p, grid, seed=9)
    assert np.array_equal(a, sample_gp_path_1d(p, grid, seed=9))
    vals = np.array([sample_gp_path_1d(p, grid, seed=s)[2] for s in range(2000)])
    assert np.mean(vals ** 2) == pytest.approx(1.7, rel=0.1)


def test_sample_path_rejects_bad_grid():
    p = KernelHyperparams(rho=[1.0])
    with pytest.raises(ContractError):
        sample_gp_path_1d(p, [0.5, 0.4], seed=0)
    with pytest.raises(ContractError):
        sample_gp_path_1d(KernelHyperparams(rho=[1.0, 1.0]), [0.1, 0.2], seed=0)
