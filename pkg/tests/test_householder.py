import numpy as np
import pytest
from hypothesis import given, settings

from ggrqr.counting import OpCounter
from ggrqr.errors import ContractError, UnsupportedShapeError
from ggrqr.householder import (
    householder_vector, hqr2_factorize, hqrf_blocked_factorize, mht_blocked_factorize,
    mht_factorize, t_factor,
)
from ggrqr.matcore import EPS, metrics, random_matrix
from ggrqr.rotations import gr_factorize
from strategies import vectors


def test_reflector_examples():
    h = householder_vector(np.array([2.0, 0, 0]))
    assert h.beta == -2.0 and h.tau != 0
    assert np.allclose(h.apply(np.array([2.0, 0, 0])), [-2, 0, 0], atol=1e-15)

    h = householder_vector(np.array([3.0, 4.0]))
    assert h.beta == -5.0
    assert np.allclose(h.apply(np.array([3.0, 4.0])), [-5, 0], atol=1e-14)

    h = householder_vector(np.zeros(3))
    assert h.tau == 0.0
    assert np.array_equal(h.apply(np.eye(3)), np.eye(3))


@settings(max_examples=100, deadline=None)
@given(vectors(1, 6, 50.0))
def test_reflector_annihilates_and_is_orthogonal(col):
    h = householder_vector(col)
    norm = np.linalg.norm(col)
    out = h.apply(col)
    assert np.all(np.abs(out[1:]) <= 1e-13 * max(norm, 1e-300))
    assert abs(h.v[0] - 1.0) == 0
    p = h.apply(np.eye(col.size))
    assert np.linalg.norm(p.T @ p - np.eye(col.size)) <= 1e-13
    if h.tau:
        assert h.tau == pytest.approx(2 / (h.v @ h.v), rel=1e-13)


@pytest.mark.parametrize("f", [hqr2_factorize, mht_factorize])
def test_identity(f):
    res = f(np.eye(6))
    assert np.allclose(res.r, np.eye(6), atol=0)


@pytest.mark.parametrize("f", [hqr2_factorize, mht_factorize])
def test_bounds_16(f):
    a = random_matrix(16, 2)
    met = metrics(a, *(lambda r: (r.q, r.r))(f(a)))
    assert met.reconstruction_residual <= 50 * 16 * EPS
    assert met.orthogonality_defect <= 50 * 16 * EPS
    assert met.max_lower_triangle <= 1e-12 * np.linalg.norm(a)


def test_matches_givens_magnitudes():
    a = random_matrix(8, 3)
    ref = gr_factorize(a).r
    assert np.max(np.abs(hqr2_factorize(a).r - ref)) <= 1e-11 * np.max(np.abs(ref))


def test_fused_equals_unfused_bitwise_and_same_counts():
    a = random_matrix(16, 4)
    c1, c2 = OpCounter(), OpCounter()
    r1, r2 = hqr2_factorize(a, counter=c1), mht_factorize(a, counter=c2)
    assert np.array_equal(r1.r, r2.r) and np.array_equal(r1.q, r2.q)
    assert c1 == c2 and c1.muldiv > 0


@pytest.mark.parametrize("f", [hqrf_blocked_factorize, mht_blocked_factorize])
@pytest.mark.parametrize("b", [1, 4, 8, 32])
def test_blocked_agrees_with_unblocked(f, b):
    a = random_matrix(32, 5)
    ref = hqr2_factorize(a).r
    res = f(a, b)
    assert np.max(np.abs(res.r - ref)) <= 1e-11 * np.max(np.abs(ref))
    met = metrics(a, res.q, res.r)
    assert met.orthogonality_defect <= 50 * 32 * EPS


def test_blocked_panel_one_is_unblocked():
    a = random_matrix(10, 6)
    assert np.max(np.abs(hqrf_blocked_factorize(a, 1).r - hqr2_factorize(a).r)) <= 1e-12


def test_blocked_identity_and_errors():
    for b in (1, 3, 5):
        assert np.allclose(hqrf_blocked_factorize(np.eye(5), b).r, np.eye(5), atol=0)
    with pytest.raises(ContractError):
        hqrf_blocked_factorize(np.eye(5), 6)
    with pytest.raises(UnsupportedShapeError):
        mht_factorize(np.ones((2, 4)))


def test_t_factor_reproduces_product_of_reflectors():
    a = random_matrix(6, 8, cols=3)
    vs, taus, p = [], [], np.eye(6)
    work = a.copy()
    for j in range(3):
        h = householder_vector(work[j:, j])
        v = np.zeros(6)
        v[j:] = h.v
        hj = np.eye(6) - h.tau * np.outer(v, v)
        work = hj @ work
        p = p @ hj
        vs.append(v)
        taus.append(h.tau)
    vmat = np.column_stack(vs)
    t = t_factor(vmat, np.array(taus))
    assert np.allclose(np.eye(6) - vmat @ t @ vmat.T, p, atol=1e-14)
