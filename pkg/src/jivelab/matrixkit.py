"""Dense linear-algebra kernels.

Matrices are plain 2-D ``float64`` numpy arrays; an orthonormal basis is an
``(n, k)`` array with orthonormal columns. The heavy lifting is delegated to
LAPACK through numpy; this module adds the validation, deterministic sign
conventions and ordering guarantees the rest of the package relies on.

Sign conventions
----------------
* QR: every diagonal entry of R is made nonnegative.
* Eigenvectors and singular vectors: the largest-magnitude entry of each
  column is made positive (right singular vectors are flipped along).
* Ties among equal singular values / eigenvalues keep the order returned
  by LAPACK (a stable sort is used after any reordering).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidRank,
    MatrixFormatError,
    NonFinite,
    NotSquare,
    NotSymmetric,
    RankDeficient,
)

ORTHO_TOL = 1e-10
RANK_RTOL = 1e-12
SYM_TOL = 1e-8


class TruncatedSvd(NamedTuple):
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.T


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float64 array (vectors become one column)."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} contains NaN or Inf")
    return a


def orthonormality_residual(b) -> float:
    """``max |B^T B - I|``."""
    b = np.asarray(b, dtype=np.float64)
    return float(np.max(np.abs(b.T @ b - np.eye(b.shape[1])), initial=0.0))


def is_orthonormal(b, tol: float = ORTHO_TOL) -> bool:
    return orthonormality_residual(b) <= tol


def _fix_column_signs(vecs: np.ndarray, partner: np.ndarray | None = None):
    # largest-magnitude entry of each column made positive (works on stacks)
    idx = np.argmax(np.abs(vecs), axis=-2)
    pivots = np.take_along_axis(vecs, idx[..., None, :], axis=-2)
    signs = np.where(pivots < 0, -1.0, 1.0)
    vecs = vecs * signs
    if partner is not None:
        partner = partner * signs
    return vecs, partner


def qr_orthonormalize(m) -> np.ndarray:
    """Orthonormal basis of ``col(m)`` from a thin QR with ``diag(R) >= 0``.

    Raises
    ------
    RankDeficient
        If the smallest ``|R_ii|`` is below ``1e-12`` times the largest.
    """
    a = as_matrix(m)
    if a.shape[1] > a.shape[0]:
        raise RankDeficient(f"{a.shape[1]} columns cannot be independent in R^{a.shape[0]}")
    q, r = np.linalg.qr(a)
    d = np.diag(r)
    mags = np.abs(d)
    if mags.size and (mags.max() == 0.0 or mags.min() < RANK_RTOL * mags.max()):
        raise RankDeficient("matrix is numerically rank deficient")
    return q * np.where(d < 0, -1.0, 1.0)


def qr_orthonormalize_batch(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched :func:`qr_orthonormalize` over a ``(K, n, k)`` stack.

    Returns the bases and a boolean mask of rank-deficient slices (their
    bases are left unusable; callers redraw them).
    """
    q, r = np.linalg.qr(stack)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    mags = np.abs(d)
    big = mags.max(axis=-1)
    bad = (big == 0.0) | (mags.min(axis=-1) < RANK_RTOL * big)
    q = q * np.where(d < 0, -1.0, 1.0)[..., None, :]
    return q, bad


def _check_rank(k: int, limit: int):
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= limit:
        raise InvalidRank(f"rank {k} outside [1, {limit}]")


def truncated_svd(m, k: int) -> TruncatedSvd:
    """Top-``k`` singular triplets of ``m``.

    Singular values come out non-increasing; exactly tied values keep
    LAPACK's order. Singular-vector signs follow the module convention.
    """
    a = as_matrix(m)
    _check_rank(k, min(a.shape))
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    left, right = _fix_column_signs(u[:, :k], vt[:k].T)
    return TruncatedSvd(left, s[:k].copy(), right)


def top_left_singular_batch(stack: np.ndarray, k: int) -> np.ndarray:
    """Top-``k`` left singular bases of every slice of a ``(K, n, d)`` stack."""
    stack = np.asarray(stack, dtype=np.float64)
    _check_rank(k, min(stack.shape[-2:]))
    u, _, _ = np.linalg.svd(stack, full_matrices=False)
    left, _ = _fix_column_signs(u[..., :k])
    return left


def truncated_svd_batch(stack: np.ndarray, k: int):
    """Batched :func:`truncated_svd`; returns ``(left, s, right)`` stacks."""
    stack = np.asarray(stack, dtype=np.float64)
    _check_rank(k, min(stack.shape[-2:]))
    u, s, vt = np.linalg.svd(stack, full_matrices=False)
    left, right = _fix_column_signs(u[..., :k], np.swapaxes(vt[..., :k, :], -1, -2))
    return left, s[..., :k], right


def sym_top_eigvecs(s, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-``k`` eigenpairs of a symmetric matrix.

    The input is symmetrized as ``(s + s.T) / 2`` after checking
    ``max|s - s.T| <= 1e-8``. Eigenvalues are returned non-increasing.
    """
    a = as_matrix(s)
    if a.shape[0] != a.shape[1]:
        raise NotSquare(f"expected a square matrix, got {a.shape}")
    if a.size and np.max(np.abs(a - a.T)) > SYM_TOL:
        raise NotSymmetric("matrix is not symmetric to 1e-8")
    _check_rank(k, a.shape[0])
    w, v = np.linalg.eigh((a + a.T) / 2.0)
    order = np.argsort(-w, kind="stable")[:k]
    vecs, _ = _fix_column_signs(v[:, order])
    return vecs, w[order]


def sym_eigvals_desc(s) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, non-increasing."""
    a = as_matrix(s)
    return np.linalg.eigvalsh((a + a.T) / 2.0)[::-1]


def spectral_norm(m) -> float:
    """Largest singular value (0 for empty or zero input)."""
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def project_out(m, b) -> np.ndarray:
    """``(I - b b^T) m``."""
    a = as_matrix(m)
    basis = as_matrix(b, "basis")
    if basis.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"basis has {basis.shape[0]} rows, matrix has {a.shape[0]}")
    return a - basis @ (basis.T @ a)


# -- plain-text matrix format -------------------------------------------------

def format_matrix(m) -> str:
    a = as_matrix(m)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    lines.extend(" ".join(f"{x:.16e}" for x in row) for row in a)
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = [ln.split() for ln in text.strip().splitlines()]
    if not rows or len(rows[0]) != 2:
        raise MatrixFormatError("first line must be 'rows cols'")
    try:
        nr, nc = int(rows[0][0]), int(rows[0][1])
        body = [[float(x) for x in row] for row in rows[1:]]
    except ValueError as exc:
        raise MatrixFormatError(str(exc)) from None
    if len(body) != nr or any(len(row) != nc for row in body):
        raise MatrixFormatError(f"expected {nr} rows of {nc} values")
    return as_matrix(np.array(body, dtype=np.float64).reshape(nr, nc))


def write_matrix(path, m) -> None:
    with open(path, "w") as fh:
        fh.write(format_matrix(m))


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return parse_matrix(fh.read())
