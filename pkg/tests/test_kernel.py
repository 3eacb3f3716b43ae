import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from balanced_da.core import LabeledDomain, UnlabeledDomain
from balanced_da.errors import DimensionMismatch, EmptyDomain, NonpositiveGamma
from balanced_da.kernel import KERNELIZED, PRIMAL, InputMatrix, centering_matrix, linear_kernel, \
    rbf_kernel, stack_domains

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def test_stack_two_samples():
    X = stack_domains(LabeledDomain([[1.0, 2.0], [0.0, 0.0]], [1, 2]), UnlabeledDomain([[3.0, 4.0]]))
    assert X.mode == PRIMAL
    assert np.array_equal(X.data, [[1.0, 0.0, 3.0], [2.0, 0.0, 4.0]])


def test_stack_empty_source():
    src = LabeledDomain(np.zeros((0, 2)), np.zeros(0, dtype=int), n_classes=2)
    with pytest.raises(EmptyDomain):
        stack_domains(src, UnlabeledDomain([[3.0, 4.0]]))


def test_stack_column_j_is_sample_j():
    rng = np.random.default_rng(5)
    Xs, Xt = rng.random((5, 3)), rng.random((4, 3))
    X = stack_domains(LabeledDomain(Xs, [1, 2, 1, 2, 1]), UnlabeledDomain(Xt)).data
    assert X.shape == (3, 9)
    samples = list(Xs) + list(Xt)
    for j in range(9):
        assert np.array_equal(X[:, j], samples[j])


def test_linear_kernel_small_cases():
    assert np.array_equal(linear_kernel(np.array([[1.0, 0.0], [0.0, 1.0]])).data, np.eye(2))
    assert np.array_equal(linear_kernel(np.array([[2.0], [3.0]])).data, [[13.0]])


def test_linear_kernel_brute_force_gram():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((4, 6))
    K = linear_kernel(X).data
    for i in range(6):
        for j in range(6):
            ref = sum(float(X[k, i]) * float(X[k, j]) for k in range(4))
            assert abs(K[i, j] - ref) <= 1e-12 * max(1.0, abs(ref))


def test_rbf_identical_samples_all_ones():
    X = np.ones((3, 4))
    assert np.array_equal(rbf_kernel(X, 0.7).data, np.ones((4, 4)))


def test_rbf_two_points():
    K = rbf_kernel(np.array([[0.0, 1.0]]), 1.0).data
    e = math.exp(-1.0)
    assert np.allclose(K, [[1.0, e], [e, 1.0]], rtol=0, atol=1e-15)


def test_rbf_brute_force():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((3, 5))
    K = rbf_kernel(X, 0.5).data
    for i in range(5):
        for j in range(5):
            d2 = sum((float(X[k, i]) - float(X[k, j])) ** 2 for k in range(3))
            assert abs(K[i, j] - math.exp(-0.5 * d2)) <= 1e-14


@pytest.mark.parametrize("gamma", [0.0, -1.0])
def test_rbf_nonpositive_gamma(gamma):
    with pytest.raises(NonpositiveGamma):
        rbf_kernel(np.ones((2, 2)), gamma)


def test_centering_small():
    assert np.array_equal(centering_matrix(2), [[0.5, -0.5], [-0.5, 0.5]])
    H = centering_matrix(3)
    assert np.allclose(np.diag(H), 2 / 3, atol=1e-15)
    assert np.allclose(H[~np.eye(3, dtype=bool)], -1 / 3, atol=1e-15)


@pytest.mark.parametrize("total", [7, 100, 1000])
def test_centering_idempotent(total):
    H = centering_matrix(total)
    assert np.max(np.abs(H @ H - H)) <= 1e-12
    assert np.max(np.abs(H.sum(axis=1))) <= 1e-12
    assert np.array_equal(H, H.T)


def test_kernelized_input_checks():
    with pytest.raises(DimensionMismatch):
        InputMatrix(np.ones((2, 3)), KERNELIZED)
    with pytest.raises(ValueError):
        InputMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]), KERNELIZED)
    with pytest.raises(ValueError):
        InputMatrix(np.array([[-1.0, 0.0], [0.0, 1.0]]), KERNELIZED)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 12)), elements=finite))
def test_linear_kernel_properties(X):
    K = linear_kernel(X).data
    assert np.max(np.abs(K - K.T)) <= 1e-10
    w = np.linalg.eigvalsh(K)
    assert w[0] >= -1e-8 * max(w[-1], 1.0)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 12)), elements=finite),
       st.floats(1e-3, 10.0))
def test_rbf_properties(X, gamma):
    K = rbf_kernel(X, gamma).data
    assert np.all(K <= 1.0) and np.all(K >= 0.0)
    assert np.all(np.diag(K) == 1.0)
    assert np.max(np.abs(K - K.T)) <= 1e-10
