import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from batchkrig import kernels
from batchkrig.kernels import Kernel, cross, evaluate, gram
from batchkrig.linalg import cholesky

coords = st.floats(0.0, 10.0, allow_nan=False)
families = st.sampled_from(["se", "matern52", "brownian"])


class TestEvaluate:
    def test_brownian_is_min(self, brownian):
        assert evaluate(brownian, 0.75, 0.5) == 0.5
        assert evaluate(brownian, 0.5, 0.75) == 0.5

    def test_brownian_prior_variance(self, brownian):
        assert evaluate(brownian, 0.75, 0.75) == 0.75

    def test_se_zero_lag_is_variance(self):
        assert evaluate(Kernel("se", 1.0, 1.0), [0.3, -1.2], [0.3, -1.2]) == 1.0
        assert evaluate(Kernel("matern52", 2.5, 0.4), 1.0, 1.0) == 2.5

    def test_known_values(self):
        # closed forms at unit distance, lengthscale 1
        assert evaluate(Kernel("se"), 0.0, 1.0) == pytest.approx(np.exp(-0.5), rel=1e-15)
        r = np.sqrt(5.0)
        expected = (1 + r + r**2 / 3) * np.exp(-r)
        assert evaluate(Kernel("matern52"), 0.0, 1.0) == pytest.approx(expected, rel=1e-15)

    @given(families, coords, coords)
    def test_symmetric(self, family, x, y):
        k = Kernel(family, 1.3, 0.7)
        assert evaluate(k, x, y) == evaluate(k, y, x)

    @given(st.sampled_from(["se", "matern52"]), arrays(float, 3, elements=coords), arrays(float, 3, elements=coords))
    def test_symmetric_3d(self, family, x, y):
        k = Kernel(family, 0.9, 0.4)
        assert evaluate(k, x, y) == evaluate(k, y, x)

    @given(st.floats(0.0, 100.0), st.floats(0.0, 100.0))
    def test_brownian_min_exact(self, x, y):
        assert evaluate(Kernel("brownian"), x, y) == min(x, y)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            evaluate(Kernel("se"), [0.0, 1.0], [0.0, 1.0, 2.0])

    def test_brownian_rejects_multivariate(self, brownian):
        with pytest.raises(ValueError, match="d = 1"):
            evaluate(brownian, [0.1, 0.2], [0.3, 0.4])

    def test_brownian_rejects_negative(self, brownian):
        with pytest.raises(ValueError, match="nonnegative"):
            evaluate(brownian, -0.1, 0.5)


class TestKernelConfig:
    @pytest.mark.parametrize("alias,family", [("SE", "se"), ("rbf", "se"), ("wiener", "brownian"), ("matern", "matern52")])
    def test_aliases(self, alias, family):
        assert Kernel(alias).family == family

    @pytest.mark.parametrize("kwargs", [{"variance": 0.0}, {"variance": -1.0}, {"lengthscale": 0.0}, {"family": "cubic"}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            Kernel(**kwargs)

    def test_frozen(self):
        k = Kernel()
        with pytest.raises(AttributeError):
            k.variance = 2.0


class TestGram:
    def test_counterexample_gram(self, brownian):
        np.testing.assert_array_equal(gram(brownian, [0.5, 1.0]), [[0.5, 0.5], [0.5, 1.0]])

    def test_single_point(self):
        k = Kernel("matern52", 1.7, 0.2)
        np.testing.assert_array_equal(gram(k, [[0.1, 0.2]]), [[evaluate(k, [0.1, 0.2], [0.1, 0.2])]])

    def test_exactly_symmetric(self, rng):
        for family in ("se", "matern52"):
            K = gram(Kernel(family, 1.0, 0.3), rng.uniform(size=(30, 3)))
            assert np.array_equal(K, K.T)

    def test_entries_match_evaluate(self, rng):
        k = Kernel("se", 0.8, 0.5)
        X = rng.uniform(size=(5, 2))
        K = gram(k, X)
        for i in range(5):
            for j in range(5):
                assert K[i, j] == pytest.approx(evaluate(k, X[i], X[j]), rel=1e-15)

    def test_se_random_design_factorizes(self, rng):
        K = gram(Kernel("se", 1.0, 0.3), rng.uniform(size=(6, 2)))
        F = cholesky(K, jitter=1e-10)
        np.testing.assert_allclose(F.reconstruct(), K + 1e-10 * np.eye(6), atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(families, st.integers(1, 20), st.integers(0, 2**32 - 1))
    def test_random_designs_psd_with_jitter(self, family, size, seed):
        rng = np.random.default_rng(seed)
        d = 1 if family == "brownian" else 3
        X = rng.uniform(0.01, 1.0, (size, d))
        cholesky(gram(Kernel(family, 1.0, 0.3), X), jitter=1e-10)

    def test_empty_design(self):
        with pytest.raises(ValueError):
            gram(Kernel(), np.empty((0, 2)))


class TestCross:
    def test_counterexample_cross(self, brownian):
        np.testing.assert_array_equal(cross(brownian, [0.75], [0.5, 1.0]), [[0.5, 0.75]])

    def test_self_cross_is_gram(self, rng):
        k = Kernel("matern52", 1.0, 0.3)
        X = rng.uniform(size=(7, 3))
        np.testing.assert_array_equal(cross(k, X, X), gram(k, X))

    def test_transpose(self, rng):
        k = Kernel("se", 1.0, 0.3)
        X, Y = rng.uniform(size=(4, 2)), rng.uniform(size=(6, 2))
        np.testing.assert_array_equal(cross(k, X, Y), cross(k, Y, X).T)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError, match="dimension"):
            cross(Kernel(), rng.uniform(size=(3, 2)), rng.uniform(size=(3, 3)))

    def test_call_dispatch(self, brownian):
        np.testing.assert_array_equal(brownian([0.5, 1.0]), gram(brownian, [0.5, 1.0]))
        np.testing.assert_array_equal(brownian([0.75], [0.5]), [[0.5]])


def test_diag_matches_evaluate(rng):
    X = rng.uniform(size=(5, 1))
    for family in ("brownian", "se", "matern52"):
        k = Kernel(family, 1.4, 0.3)
        np.testing.assert_array_equal(kernels.diag(k, X), [evaluate(k, x, x) for x in X])


def test_as_points_shapes():
    assert kernels.as_points(0.5).shape == (1, 1)
    assert kernels.as_points([0.5, 1.0]).shape == (2, 1)
    assert kernels.as_points([]).shape == (0, 1)
    assert kernels.as_points([], d=3).shape == (0, 3)
    with pytest.raises(ValueError, match="finite"):
        kernels.as_points([0.1, np.nan])
