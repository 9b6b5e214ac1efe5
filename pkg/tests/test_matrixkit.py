import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from jivelab import matrixkit as mk
from jivelab.errors import (
    InvalidRank, MatrixFormatError, NonFinite, NotSquare, NotSymmetric, RankDeficient,
)
from jivelab.metrics import subspace_error

import oracles


def test_qr_identity_is_fixed():
    assert np.array_equal(mk.qr_orthonormalize(np.eye(3)), np.eye(3))


def test_qr_normalizes_column():
    q = mk.qr_orthonormalize([[3.0], [4.0]])
    np.testing.assert_allclose(q[:, 0], [0.6, 0.8], atol=1e-15)


def test_qr_random_tall():
    m = np.random.default_rng(1).standard_normal((50, 5))
    b = mk.qr_orthonormalize(m)
    assert np.max(np.abs(b.T @ b - np.eye(5))) <= 1e-12
    assert mk.spectral_norm(m - b @ (b.T @ m)) <= 1e-10


def test_qr_sign_convention():
    m = np.random.default_rng(2).standard_normal((8, 3))
    q = mk.qr_orthonormalize(m)
    assert np.all(np.diag(q.T @ m) > 0)


def test_qr_rank_deficient():
    with pytest.raises(RankDeficient):
        mk.qr_orthonormalize([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(RankDeficient):
        mk.qr_orthonormalize(np.ones((2, 3)))


def test_qr_batch_matches_single():
    stack = np.random.default_rng(3).standard_normal((6, 9, 3))
    q, bad = mk.qr_orthonormalize_batch(stack)
    assert not bad.any()
    for k in range(6):
        np.testing.assert_allclose(q[k], mk.qr_orthonormalize(stack[k]), atol=1e-14)


def test_truncated_svd_diagonal():
    t = mk.truncated_svd(np.diag([3.0, 2.0, 1.0]), 2)
    np.testing.assert_allclose(t.singular_values, [3.0, 2.0])
    np.testing.assert_allclose(np.abs(t.left), np.eye(3)[:, :2], atol=1e-15)


def test_truncated_svd_rank_one():
    rng = np.random.default_rng(4)
    u = rng.standard_normal(6)
    v = rng.standard_normal(4)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    t = mk.truncated_svd(np.outer(u, v), 1)
    assert abs(t.singular_values[0] - 1.0) <= 1e-14
    assert abs(abs(t.left[:, 0] @ u) - 1.0) <= 1e-14


def test_truncated_svd_against_jacobi():
    m = np.random.default_rng(5).standard_normal((40, 30))
    t = mk.truncated_svd(m, 5)
    u, s, _ = oracles.jacobi_svd(m)
    np.testing.assert_allclose(t.singular_values, s[:5], atol=1e-10)
    assert subspace_error(t.left, u[:, :5]) <= 1e-8


def test_truncated_svd_residual_is_next_singular_value():
    rng = np.random.default_rng(6)
    for size in (20, 35, 50):
        m = rng.standard_normal((size, size))
        t = mk.truncated_svd(m, 4)
        s = oracles.jacobi_svd(m)[1]
        assert abs(mk.spectral_norm(m - t.reconstruct()) - s[4]) <= 1e-8


def test_truncated_svd_sign_convention():
    t = mk.truncated_svd(np.random.default_rng(7).standard_normal((7, 5)), 3)
    idx = np.argmax(np.abs(t.left), axis=0)
    assert np.all(t.left[idx, range(3)] > 0)


@pytest.mark.parametrize("k", [0, 4])
def test_truncated_svd_rank_bounds(k):
    with pytest.raises(InvalidRank):
        mk.truncated_svd(np.ones((3, 4)), k)


def test_truncated_svd_batch_matches_single():
    stack = np.random.default_rng(8).standard_normal((5, 10, 7))
    left, s, right = mk.truncated_svd_batch(stack, 3)
    for k in range(5):
        t = mk.truncated_svd(stack[k], 3)
        np.testing.assert_allclose(left[k], t.left, atol=1e-12)
        np.testing.assert_allclose(s[k], t.singular_values, atol=1e-12)
        np.testing.assert_allclose(right[k], t.right, atol=1e-12)
    np.testing.assert_allclose(mk.top_left_singular_batch(stack, 3), left, atol=1e-12)


def test_non_finite_rejected():
    with pytest.raises(NonFinite):
        mk.truncated_svd([[1.0, np.nan], [0.0, 1.0]], 1)


def test_sym_top_eigvecs_diagonal():
    vecs, vals = mk.sym_top_eigvecs(np.diag([5.0, 1.0, 1.0]), 1)
    assert vals[0] == 5.0
    np.testing.assert_allclose(vecs[:, 0], [1.0, 0.0, 0.0])
    vecs, _ = mk.sym_top_eigvecs(np.diag([2.0, 1.0, 1.0]), 1)
    np.testing.assert_allclose(np.abs(vecs[:, 0]), [1.0, 0.0, 0.0])


def test_sym_top_eigvecs_against_jacobi():
    rng = np.random.default_rng(9)
    g = rng.standard_normal((20, 20))
    s = g + g.T
    vecs, vals = mk.sym_top_eigvecs(s, 4)
    w, v = oracles.jacobi_eigh(s)
    np.testing.assert_allclose(vals, w[:4], atol=1e-10)
    for j in range(4):
        assert abs(abs(vecs[:, j] @ v[:, j]) - 1.0) <= 1e-10


def test_sym_top_eigvecs_errors():
    with pytest.raises(NotSquare):
        mk.sym_top_eigvecs(np.ones((2, 3)), 1)
    with pytest.raises(NotSymmetric):
        mk.sym_top_eigvecs([[1.0, 2.0], [0.0, 1.0]], 1)
    with pytest.raises(InvalidRank):
        mk.sym_top_eigvecs(np.eye(2), 3)


def test_sym_top_eigvecs_symmetrizes_small_asymmetry():
    s = np.diag([3.0, 1.0])
    s[0, 1] = 1e-9
    vecs, vals = mk.sym_top_eigvecs(s, 2)
    assert np.max(np.abs(vecs.T @ vecs - np.eye(2))) <= 1e-12


def test_spectral_norm_examples():
    assert mk.spectral_norm(np.diag([3.0, 2.0])) == pytest.approx(3.0, abs=1e-14)
    assert mk.spectral_norm(np.zeros((4, 3))) == 0.0


def test_spectral_norm_projection_difference():
    rng = np.random.default_rng(10)
    a = mk.qr_orthonormalize(rng.standard_normal((10, 2)))
    b = mk.qr_orthonormalize(rng.standard_normal((10, 2)))
    d = a @ a.T - b @ b.T
    val = mk.spectral_norm(d)
    assert 0.0 <= val <= 1.0 + 1e-12
    assert abs(val - oracles.spectral_norm_oracle(d)) <= 1e-10


def test_project_out_examples():
    e1 = np.array([[1.0], [0.0], [0.0]])
    e2 = np.array([[0.0], [1.0], [0.0]])
    assert np.all(mk.project_out(e1, e1) == 0.0)
    np.testing.assert_array_equal(mk.project_out(e2, e1), e2)


def test_project_out_idempotent():
    rng = np.random.default_rng(11)
    m = rng.standard_normal((10, 4))
    b = mk.qr_orthonormalize(rng.standard_normal((10, 2)))
    once = mk.project_out(m, b)
    np.testing.assert_allclose(mk.project_out(once, b), once, atol=1e-12)


def test_matrix_text_round_trip(tmp_path):
    m = np.random.default_rng(12).standard_normal((4, 3)) * 10.0 ** np.arange(-6, 6).reshape(4, 3)
    path = tmp_path / "m.mat"
    mk.write_matrix(path, m)
    assert np.array_equal(mk.read_matrix(path), m)
    head = path.read_text().splitlines()[0]
    assert head == "4 3"


@pytest.mark.parametrize("text", ["", "3\n1 2 3\n", "2 2\n1 2\n3\n", "1 2\n1 x\n"])
def test_matrix_text_malformed(text):
    with pytest.raises(MatrixFormatError):
        mk.parse_matrix(text)


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 8), st.integers(2, 8)), elements=finite))
def test_spectral_norm_transpose_invariant(m):
    assert abs(mk.spectral_norm(m) - mk.spectral_norm(m.T)) <= 1e-10 * max(1.0, mk.spectral_norm(m))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(1, 4))
def test_projection_difference_bounded(seed, n, k):
    k = min(k, n)
    rng = np.random.default_rng(seed)
    a = mk.qr_orthonormalize(rng.standard_normal((n, k)))
    b = mk.qr_orthonormalize(rng.standard_normal((n, k)))
    assert mk.orthonormality_residual(a) <= 1e-10
    assert mk.spectral_norm(a @ a.T - b @ b.T) <= 1.0 + 1e-12
