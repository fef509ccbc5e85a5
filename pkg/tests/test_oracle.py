import numpy as np
import pytest

from batchkrig import Kernel, gram
from batchkrig import oracle
from batchkrig.linalg import NotPositiveDefinite


def test_counterexample_variance():
    mean, var, cov = oracle.refit_predict(Kernel("brownian"), [0.5, 1.0], [1.0, 2.0], 0.75)
    assert var == pytest.approx(0.125, abs=1e-15)
    assert mean == pytest.approx(1.5, rel=1e-15)
    assert cov is None


def test_single_observation_interpolates():
    k = Kernel("se", 1.0, 0.3)
    mean, var, _ = oracle.refit_predict(k, [[0.2, 0.7]], [3.0], [0.2, 0.7])
    assert var == pytest.approx(0.0, abs=1e-15)
    assert mean == pytest.approx(3.0, rel=1e-15)


def test_no_observations_is_prior():
    mean, var, cov = oracle.refit_predict(Kernel("brownian"), [], [], 0.75, 0.5)
    assert (mean, var, cov) == (0.0, 0.75, 0.5)


def test_full_weights_counterexample():
    fw = oracle.full_weights(Kernel("brownian"), [0.5, 1.0], 0.75, n_old=0)
    assert fw.lambda_old.size == 0
    np.testing.assert_allclose(fw.lambda_new, [0.5, 0.5], rtol=1e-15)


def test_full_weights_unit_at_observation(rng):
    X = rng.uniform(size=(6, 2))
    fw = oracle.full_weights(Kernel("matern52", 1.0, 0.4), X, X[4], n_old=3)
    np.testing.assert_allclose(fw.all, np.eye(6)[4], atol=1e-12)


def test_full_weights_solve_system(rng):
    k = Kernel("se", 1.0, 0.5)
    X = rng.uniform(size=(9, 2))
    x = rng.uniform(size=2)
    fw = oracle.full_weights(k, X, x, n_old=6)
    assert fw.lambda_old.shape == (6,) and fw.lambda_new.shape == (3,)
    np.testing.assert_allclose(gram(k, X) @ fw.all, k(X, x[None, :])[:, 0], atol=1e-9)


def test_mean_is_weights_dot_observations(rng):
    k = Kernel("se", 1.0, 0.5)
    X = rng.uniform(size=(8, 3))
    Z = rng.standard_normal(8)
    for x in rng.uniform(size=(4, 3)):
        mean, _, _ = oracle.refit_predict(k, X, Z, x)
        assert mean == pytest.approx(oracle.full_weights(k, X, x, 5).all @ Z, abs=1e-10)


def test_naive_cholesky_matches_numpy(rng):
    G = rng.standard_normal((12, 12))
    A = G @ G.T + np.eye(12)
    np.testing.assert_allclose(oracle.naive_cholesky(A), np.linalg.cholesky(A), atol=1e-12)


def test_naive_cholesky_singular():
    with pytest.raises(NotPositiveDefinite):
        oracle.naive_cholesky(np.ones((3, 3)))


def test_vectorized_queries(rng):
    k = Kernel("matern52", 0.7, 0.3)
    X = rng.uniform(size=(6, 2))
    Z = rng.standard_normal(6)
    Q, P = rng.uniform(size=(2, 5, 2))
    means, variances, covs = oracle.refit_predict(k, X, Z, Q, P)
    for i in range(5):
        m, v, c = oracle.refit_predict(k, X, Z, Q[i], P[i])
        assert means[i] == pytest.approx(m, abs=1e-14)
        assert variances[i] == pytest.approx(v, abs=1e-14)
        assert covs[i] == pytest.approx(c, abs=1e-14)


def test_deterministic(rng):
    k = Kernel("se", 1.0, 0.4)
    X = rng.uniform(size=(7, 2))
    Z = rng.standard_normal(7)
    x = rng.uniform(size=2)
    assert oracle.refit_predict(k, X, Z, x) == oracle.refit_predict(k, X, Z, x)
