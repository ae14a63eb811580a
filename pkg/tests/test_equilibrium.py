import numpy as np
import pytest

from opinionselect import (NoiseModel, covariance_closed_form,
                           covariance_lyapunov, generate_random_reachable,
                           generate_random_regular, mean, moments, normalize,
                           precision, precision_direct, spectral_radius)
from conftest import random_instance, series_covariance


def test_noise_model_requires_positive_variances():
    with pytest.raises(ValueError):
        NoiseModel(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        NoiseModel(np.array([[1.0, 2.0]]))


def test_mean_consensus_absorption():
    # all stubborn opinions equal -> every regular agent absorbs that value
    for seed in range(5):
        g = generate_random_reachable(12, 3, seed)
        ops = normalize(g)
        u0 = 0.7
        mu = mean(ops, np.full(3, u0))
        assert np.allclose(mu, u0)


def test_mean_chain(chain_instance):
    _, ops = chain_instance
    mu = mean(ops, np.array([1.0]))
    assert np.allclose(mu, [1.0, 1.0])


def test_mean_A_zero_is_Bu():
    # star: two regular leaves attached to one stubborn hub -> A = 0
    from opinionselect import SocialGraph
    W = np.zeros((3, 3))
    W[0, 2] = W[2, 0] = 1.0
    W[1, 2] = W[2, 1] = 2.0
    ops = normalize(SocialGraph(weights=W, stubborn=(2,)))
    assert np.allclose(ops.A, 0.0)
    u = np.array([0.3])
    assert np.allclose(mean(ops, u), ops.B @ u)


def test_spectral_radius_examples():
    assert spectral_radius(np.zeros((3, 3))) == 0.0
    assert abs(spectral_radius(np.array([[0., .5], [.5, 0.]])) - 0.5) < 1e-9
    assert spectral_radius(np.zeros((0, 0))) == 0.0
    # non-power-convergent matrix falls back to the eigensolver
    rot = np.array([[0., -1.], [1., 0.]])
    assert abs(spectral_radius(rot, max_iter=5) - 1.0) < 1e-9


def test_lyapunov_A_zero_returns_sigma():
    noise = NoiseModel(np.array([1.0, 2.5, 0.3]))
    C = covariance_lyapunov(np.zeros((3, 3)), noise)
    assert np.allclose(C, noise.matrix)


def test_lyapunov_matches_series_oracle():
    A = np.array([[0., .5], [.5, 0.]])
    noise = NoiseModel(np.ones(2))
    C = covariance_lyapunov(A, noise)
    C_oracle = series_covariance(A, noise.sigma2)
    assert np.linalg.norm(C - C_oracle) / np.linalg.norm(C_oracle) < 1e-12
    # frozen oracle values: C = (I - A^2)^{-1} here (A symmetric, Sigma = I)
    assert np.allclose(C, [[4. / 3., 0.], [0., 4. / 3.]], atol=1e-12)


def test_lyapunov_residual_and_pd_random():
    for seed in range(20):
        ops, noise, C = random_instance(seed, n=12, n_stubborn=2)
        Sigma = noise.matrix
        res = np.linalg.norm(C - ops.A @ C @ ops.A.T - Sigma)
        assert res <= 1e-10 * np.linalg.norm(C)
        assert np.min(np.linalg.eigvalsh(C)) > 0
        assert np.allclose(C, C.T)


def test_lyapunov_linearity_in_noise():
    ops, noise, C = random_instance(3, n=10)
    for t in (0.25, 2.0, 7.5):
        Ct = covariance_lyapunov(ops.A, NoiseModel(t * noise.sigma2))
        assert np.linalg.norm(Ct - t * C) <= 1e-10 * np.linalg.norm(Ct)


def test_closed_form_A_zero():
    noise = NoiseModel(np.array([2.0, 0.5]))
    cf = covariance_closed_form(np.zeros((2, 2)), noise)
    assert cf.accepted
    assert np.allclose(cf.covariance, noise.matrix)


def test_closed_form_accepted_on_regular_graph_uniform_noise():
    for seed in range(10):
        g = generate_random_regular(10, 3, seed, 2)
        ops = normalize(g)
        noise = NoiseModel.uniform(ops.n_regular, 1.3)
        cf = covariance_closed_form(ops.A, noise)
        assert cf.accepted
        C_ly = covariance_lyapunov(ops.A, noise)
        rel = np.linalg.norm(cf.covariance - C_ly) / np.linalg.norm(C_ly)
        assert rel < 1e-8


def test_closed_form_sigma_proportional_to_degree_is_symmetric_but_inconsistent():
    # sigma_i^2 ~ w_i makes the candidate exactly symmetric, yet on a graph
    # with heterogeneous degrees it does not solve the Lyapunov equation
    g = generate_random_reachable(10, 2, seed=4)
    ops = normalize(g)
    wR = ops.w[list(ops.regular)]
    noise = NoiseModel(wR.copy())
    cf = covariance_closed_form(ops.A, noise)
    assert cf.symmetric
    assert cf.asymmetry < 1e-12
    assert not cf.accepted
    assert cf.lyapunov_residual > 1e-3
    C_ly = covariance_lyapunov(ops.A, noise)
    assert np.linalg.norm(cf.covariance - C_ly) / np.linalg.norm(C_ly) > 1e-3


def test_closed_form_heterogeneous_rejected_by_asymmetry():
    ops, noise, _ = random_instance(11, n=10)
    cf = covariance_closed_form(ops.A, noise)
    # asymmetry of the raw candidate decides the symmetry flag
    expected = cf.asymmetry <= 1e-10
    assert cf.symmetric == expected


def test_accepted_implies_lyapunov_match():
    # acceptance must never let a wrong fast path through
    for seed in range(40):
        kind = seed % 3
        if kind == 0:
            g = generate_random_regular(8, 3, seed, 1)
            ops = normalize(g)
            noise = NoiseModel.uniform(ops.n_regular, 0.8)
        elif kind == 1:
            ops, noise, _ = random_instance(seed, n=9)
        else:
            g = generate_random_reachable(9, 2, seed)
            ops = normalize(g)
            noise = NoiseModel(ops.w[list(ops.regular)].copy())
        cf = covariance_closed_form(ops.A, noise)
        C_ly = covariance_lyapunov(ops.A, noise)
        rel = np.linalg.norm(cf.covariance - C_ly) / np.linalg.norm(C_ly)
        if cf.accepted:
            assert rel < 1e-8
        else:
            assert not cf.symmetric or rel > 1e-8


def test_precision_diag_case():
    sigma2 = np.array([2.0, 4.0, 0.5])
    H = precision(np.diag(sigma2))
    assert np.allclose(H, np.diag(1.0 / sigma2))


def test_precision_inverse_identity_random():
    for seed in range(10):
        _, _, C = random_instance(seed, n=10)
        H = precision(C)
        assert np.linalg.norm(H @ C - np.eye(C.shape[0])) < 1e-8
        assert np.allclose(H, H.T)


def test_precision_offdiagonals_nonpositive_on_accepted():
    for seed in range(10):
        g = generate_random_regular(10, 3, seed, 2)
        ops = normalize(g)
        noise = NoiseModel.uniform(ops.n_regular, 1.0)
        cf = covariance_closed_form(ops.A, noise)
        assert cf.accepted
        H = precision(cf.covariance)
        Hd = precision_direct(ops.A, noise)
        assert np.linalg.norm(H - Hd) / np.linalg.norm(H) < 1e-8
        off = H - np.diag(np.diag(H))
        assert np.max(off) <= 1e-12


def test_moments_convenience_method_tags():
    g = generate_random_regular(10, 3, 2, 2)
    ops = normalize(g)
    noise = NoiseModel.uniform(ops.n_regular, 1.0)
    mom = moments(ops, noise, np.zeros(len(ops.stubborn)))
    assert mom.method_tag == "closed-form"

    ops2, noise2, _ = random_instance(5, n=10)
    mom2 = moments(ops2, noise2, np.zeros(len(ops2.stubborn)))
    assert mom2.method_tag == "lyapunov"
    assert np.linalg.norm(mom2.H @ mom2.C - np.eye(mom2.C.shape[0])) < 1e-8
