import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ggrqr.counting import OpCounter
from ggrqr.errors import ContractError
from ggrqr.matcore import (
    DenseMatrix, column_norm2, matmul, matvec, metrics, random_matrix, sign_normalize,
)
from ggrqr.householder import hqr2_factorize
from oracles import double_loop_matvec, triple_loop_matmul

small = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_dense_matrix_column_major_layout():
    m = DenseMatrix.from_array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    assert m.rows == 2 and m.cols == 3
    assert list(m.data) == [1.0, 4.0, 2.0, 5.0, 3.0, 6.0]
    assert m.at(2, 3) == 6.0
    assert m.at(1, 2) == m.data[(2 - 1) * 2 + (1 - 1)]


def test_dense_matrix_rejects_bad_length():
    with pytest.raises(ValueError):
        DenseMatrix(2, 2, np.zeros(3))


def test_matmul_identity_and_hand_example():
    m = np.arange(12.0).reshape(3, 4)
    assert np.array_equal(matmul(np.eye(3), m), m)
    c = matmul(np.array([[1.0, 2], [3, 4]]), np.array([[5.0, 6], [7, 8]]))
    assert np.array_equal(c, [[19, 22], [43, 50]])


@pytest.mark.parametrize("n", [8, 16])
def test_matmul_matches_triple_loop(n):
    a, b = random_matrix(n, 1), random_matrix(n, 2)
    ref = np.array(triple_loop_matmul(a.tolist(), b.tolist()))
    assert np.max(np.abs(matmul(a, b) - ref)) <= 1e-13 * np.max(np.abs(ref))


def test_matmul_block_size_does_not_change_bits():
    a, b = random_matrix(20, 3), random_matrix(20, 4)
    assert np.array_equal(matmul(a, b, block=64), matmul(a, b, block=3))


def test_matmul_shape_error_names_shapes():
    with pytest.raises(ContractError, match=r"\(2, 3\).*\(2, 2\)"):
        matmul(np.zeros((2, 3)), np.zeros((2, 2)))


def test_matmul_counts():
    c = OpCounter()
    matmul(np.ones((3, 4)), np.ones((4, 5)), counter=c)
    assert (c.mul, c.add) == (60, 45)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (4, 4), elements=small))
def test_matmul_identity_is_bitwise(m):
    i = np.eye(4)
    assert np.array_equal(matmul(i, m), m)
    assert np.array_equal(matmul(m, i), m)


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, (3, 4), elements=small),
    arrays(np.float64, (4, 2), elements=small),
    arrays(np.float64, (2, 5), elements=small),
)
def test_matmul_associative(a, b, c):
    lhs = matmul(matmul(a, b), c)
    rhs = matmul(a, matmul(b, c))
    scale = np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * scale + 1e-300


def test_matvec_examples():
    assert np.array_equal(matvec(np.eye(4), np.array([1.0, 2, 3, 4])), [1, 2, 3, 4])
    assert np.array_equal(matvec(np.array([[1.0, 2], [3, 4]]), np.ones(2)), [3, 7])
    a, x = random_matrix(16, 5), random_matrix(16, 6)[:, 0]
    ref = np.array(double_loop_matvec(a.tolist(), x.tolist()))
    assert np.max(np.abs(matvec(a, x) - ref)) <= 1e-13 * np.max(np.abs(ref))
    with pytest.raises(ContractError):
        matvec(np.eye(3), np.ones(2))


def test_column_norm2_examples():
    a = np.array([[3.0, 0, 2], [4, 0, 2], [0, 0, 2], [0, 0, 2]])
    assert column_norm2(a, 0) == 5.0
    assert column_norm2(a, 1) == 0.0
    assert column_norm2(a, 2) == 4.0
    assert column_norm2(a, 0, from_row=1) == 4.0
    with pytest.raises(IndexError):
        column_norm2(a, 3)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (6, 2), elements=small))
def test_column_norm2_is_sqrt_of_counted_squares(a):
    c = OpCounter()
    got = column_norm2(a, 1, counter=c)
    assert got >= 0
    assert got == np.sqrt(np.cumsum(a[:, 1] ** 2)[-1])
    assert (c.mul, c.add, c.sqrt) == (6, 5, 1)


def test_metrics_trivial_cases():
    i = np.eye(3)
    assert metrics(i, i, i).line() == (
        "residual=0.000000e+00 orthogonality=0.000000e+00 lower_max=0.000000e+00"
    )
    upper = np.triu(random_matrix(5, 3))
    assert metrics(upper, np.eye(5), upper).reconstruction_residual == 0.0
    with pytest.raises(ContractError):
        metrics(i, np.eye(2), i)


def test_metrics_of_householder_factorization():
    a = random_matrix(32, 11)
    res = hqr2_factorize(a)
    met = metrics(a, res.q, res.r)
    assert met.reconstruction_residual <= 1e-13
    assert min(vars(met).values()) >= 0


def test_sign_normalize_flips_rows_and_columns():
    r = np.array([[-2.0, 1], [0, 3]])
    q = np.eye(2)
    sign_normalize(r, q)
    assert np.array_equal(r, [[2, -1], [0, 3]])
    assert np.array_equal(q, [[-1, 0], [0, 1]])
