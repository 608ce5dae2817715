import numpy as np
import pytest

from paperrank import ComputationError, gram, kernel_eval
from paperrank.kernels import jittered_cholesky, rowwise


@pytest.mark.parametrize("kind", ["matern32", "matern52", "rbf"])
class TestKernelBasics:
    def test_identity(self, kind):
        a = np.array([0.3, -1.2, 4.0])
        assert kernel_eval(kind, a, a) == pytest.approx(1.0)

    def test_symmetry(self, kind):
        rng = np.random.default_rng(1)
        a, b = rng.standard_normal(4), rng.standard_normal(4)
        assert kernel_eval(kind, a, b) == pytest.approx(kernel_eval(kind, b, a))

    def test_monotone_decay_to_zero(self, kind):
        a = np.zeros(2)
        values = [kernel_eval(kind, a, np.array([r, 0.0])) for r in (0.5, 1, 2, 5, 10, 40)]
        assert all(x > y for x, y in zip(values, values[1:]))
        assert values[-1] < 1e-6

    def test_gram_psd(self, kind):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((5, 3))
        K = gram(kind, X)
        eigs = np.linalg.eigvalsh(K)
        assert eigs.min() >= -1e-8


def test_matern32_closed_form():
    r = 1.7
    t = np.sqrt(3) * r
    assert kernel_eval("matern32", np.zeros(1), np.array([r])) == pytest.approx((1 + t) * np.exp(-t))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        kernel_eval("matern32", np.zeros(2), np.zeros(3))
    with pytest.raises(ValueError):
        gram("matern32", np.zeros((2, 2)), np.zeros((2, 3)))


def test_length_scale_widens_kernel():
    a, b = np.zeros(1), np.ones(1)
    assert kernel_eval("matern32", a, b, length_scale=5.0) > kernel_eval("matern32", a, b, length_scale=0.5)


def test_rowwise_matches_elementwise():
    rng = np.random.default_rng(5)
    A, B = rng.standard_normal((6, 3)), rng.standard_normal((6, 3))
    rw = rowwise("matern32", A, B)
    for i in range(6):
        assert rw[i] == pytest.approx(kernel_eval("matern32", A[i], B[i]))


class TestJitteredCholesky:
    def test_clean_matrix_no_jitter(self):
        K = gram("matern32", np.random.default_rng(0).standard_normal((4, 2)))
        L, jitter = jittered_cholesky(K)
        assert jitter == 0.0
        assert np.allclose(L @ L.T, K)

    def test_degenerate_matrix_gets_jitter(self):
        X = np.zeros((3, 2))  # identical rows -> rank-1 Gram of ones
        K = gram("matern32", X)
        L, jitter = jittered_cholesky(K)
        assert jitter > 0
        assert np.allclose(L @ L.T, K + jitter * np.eye(3))

    def test_ladder_tops_out(self):
        K = -np.eye(3)  # negative definite: no jitter in the ladder fixes it
        with pytest.raises(ComputationError):
            jittered_cholesky(K)
