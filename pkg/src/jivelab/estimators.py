"""Shared-subspace estimators: AJIVE, the oracle-aided spectral estimator and
stacked SVD.

All three accept either a :class:`~jivelab.model.Dataset` or a sequence of
``n x d_k`` matrices. Ground truth attached to a dataset is never read;
only :func:`oracle_estimate` receives the shared basis, explicitly.

When every matrix has the same shape and unique rank the per-matrix SVDs run
as one batched LAPACK call. Aggregates are formed as a single product of the
column-concatenated factors, which fixes the reduction order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matrixkit as mk
from .errors import DimensionMismatch, InvalidRank

GAP_TOL = 1e-12


@dataclass
class PerMatrixEstimate:
    u_k_hat: np.ndarray
    w_hat: np.ndarray
    v_hat: np.ndarray | None = None
    a_hat: np.ndarray | None = None


@dataclass
class Estimate:
    u_hat: np.ndarray
    aggregate_eigenvalues: np.ndarray
    method: str
    degenerate_gap: bool = False
    per_k: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        """``lambda_r - lambda_{r+1}`` of the aggregate (nan if unavailable)."""
        r = self.u_hat.shape[1]
        ev = self.aggregate_eigenvalues
        return float(ev[r - 1] - ev[r]) if ev.size > r else float("nan")


def _matrices(data):
    mats = getattr(data, "a", data)
    if isinstance(mats, np.ndarray) and mats.ndim == 3:
        if not np.all(np.isfinite(mats)):
            raise mk.NonFinite("observations contain NaN or Inf")
        return mats
    mats = [mk.as_matrix(a, "A_k") for a in mats]
    if not mats:
        raise DimensionMismatch("need at least one matrix")
    if len({a.shape[0] for a in mats}) != 1:
        raise DimensionMismatch("all matrices must have the same number of rows")
    if len({a.shape for a in mats}) == 1:
        return np.stack(mats)
    return mats


def _rank_list(r_k, K: int) -> list[int]:
    if np.isscalar(r_k):
        return [int(r_k)] * K
    r_k = [int(x) for x in r_k]
    if len(r_k) != K:
        raise InvalidRank(f"got {len(r_k)} unique ranks for {K} matrices")
    return r_k


def _uniform(mats, ranks) -> bool:
    return isinstance(mats, np.ndarray) and len(set(ranks)) == 1


def _concat_columns(stack) -> np.ndarray:
    if isinstance(stack, np.ndarray):
        K, n, c = stack.shape
        return np.swapaxes(stack, 0, 1).reshape(n, K * c)
    return np.concatenate(list(stack), axis=1)


def _top_eig(s: np.ndarray, r: int):
    """Top-r eigenbasis plus the r+1 leading eigenvalues and a gap flag."""
    m = min(r + 1, s.shape[0])
    vecs, vals = mk.sym_top_eigvecs(s, m)
    u_hat = vecs[:, :r]
    degenerate = m > r and vals[r - 1] - vals[r] <= GAP_TOL * max(1.0, abs(vals[0]))
    return u_hat, vals, bool(degenerate)


def ajive(data, r: int, r_k, reconstruct: bool = False) -> Estimate:
    """Two-stage AJIVE estimate of the shared subspace.

    1. ``Ũ_k`` = top-(r + r_k) left singular basis of each ``A_k``.
    2. ``Û`` = top-r eigenvectors of ``sum_k Ũ_k Ũ_k^T``.
    3. (``reconstruct``) ``V̂_k = A_k^T Û``; ``Û_k`` = top-r_k left singular
       basis of ``(I - Û Û^T) A_k``; ``Ŵ_k = A_k^T Û_k``;
       ``Â_k = Û V̂_k^T + Û_k Ŵ_k^T``.

    A zero eigen-gap in step 2 sets ``degenerate_gap`` instead of raising.
    """
    mats = _matrices(data)
    K = len(mats)
    ranks = _rank_list(r_k, K)
    n = mats[0].shape[0]
    for a, rk in zip(mats, ranks):
        if r < 1 or rk < 0 or r + rk > min(a.shape):
            raise InvalidRank(f"r + r_k = {r + rk} outside [1, min{a.shape}]")
    if _uniform(mats, ranks):
        tilde = mk.top_left_singular_batch(mats, r + ranks[0])
    else:
        tilde = [mk.truncated_svd(a, r + rk).left for a, rk in zip(mats, ranks)]
    flat = _concat_columns(tilde)
    u_hat, vals, degenerate = _top_eig(flat @ flat.T, r)
    est = Estimate(u_hat=u_hat, aggregate_eigenvalues=vals, method="ajive", degenerate_gap=degenerate)
    if reconstruct:
        est.per_k = [_reconstruct_one(a, u_hat, rk, n) for a, rk in zip(mats, ranks)]
    return est


def _reconstruct_one(a, u_hat, rk, n) -> PerMatrixEstimate:
    v_hat = a.T @ u_hat
    if rk > 0:
        u_k_hat = mk.truncated_svd(mk.project_out(a, u_hat), rk).left
    else:
        u_k_hat = np.zeros((n, 0))
    w_hat = a.T @ u_k_hat
    a_hat = u_hat @ v_hat.T + u_k_hat @ w_hat.T
    return PerMatrixEstimate(u_k_hat=u_k_hat, w_hat=w_hat, v_hat=v_hat, a_hat=a_hat)


def oracle_estimate(data, r: int, r_k, u_star) -> Estimate:
    """Oracle-aided spectral estimator.

    Each unique component is estimated as the rank-r_k truncated SVD
    ``Û_k Ŵ_k^T`` of ``(I - U U^T) A_k`` using the true shared basis ``U``;
    the estimate is the top-r eigenbasis of
    ``M = (1/K) sum_k (A_k - Û_k Ŵ_k^T)(A_k - Û_k Ŵ_k^T)^T``.
    """
    u_star = mk.as_matrix(u_star, "u_star")
    mats = _matrices(data)
    K = len(mats)
    ranks = _rank_list(r_k, K)
    if u_star.shape[0] != mats[0].shape[0]:
        raise DimensionMismatch("u_star row dimension does not match the data")
    if u_star.shape[1] != r:
        raise InvalidRank(f"u_star has {u_star.shape[1]} columns, expected r = {r}")
    if _uniform(mats, ranks):
        proj = mats - u_star @ (u_star.T @ mats)
        left, s, right = mk.truncated_svd_batch(proj, ranks[0])
        w_hat = right * s[:, None, :]
        resid = mats - left @ np.swapaxes(w_hat, 1, 2)
        per_k = [PerMatrixEstimate(u_k_hat=left[k], w_hat=w_hat[k]) for k in range(K)]
    else:
        resid, per_k = [], []
        for a, rk in zip(mats, ranks):
            t = mk.truncated_svd(mk.project_out(a, u_star), rk)
            w_hat = t.right * t.singular_values
            resid.append(a - t.left @ w_hat.T)
            per_k.append(PerMatrixEstimate(u_k_hat=t.left, w_hat=w_hat))
    flat = _concat_columns(resid)
    u_hat, vals, degenerate = _top_eig(flat @ flat.T / K, r)
    return Estimate(u_hat=u_hat, aggregate_eigenvalues=vals, method="oracle",
                    degenerate_gap=degenerate, per_k=per_k)


def stacked_svd(data, r: int, route: str = "gram") -> Estimate:
    """Top-r left singular basis of ``[A_1 ... A_K]``.

    ``route="gram"`` uses the top-r eigenvectors of ``sum_k A_k A_k^T``;
    ``route="concat"`` runs a truncated SVD on the concatenation. Both report
    the leading eigenvalues of ``sum_k A_k A_k^T``.
    """
    mats = _matrices(data)
    flat = _concat_columns(mats)
    if not 1 <= r <= min(flat.shape):
        raise InvalidRank(f"r = {r} outside [1, {min(flat.shape)}]")
    if route == "gram":
        u_hat, vals, degenerate = _top_eig(flat @ flat.T, r)
    elif route == "concat":
        m = min(r + 1, min(flat.shape))
        t = mk.truncated_svd(flat, m)
        u_hat, vals = t.left[:, :r], t.singular_values**2
        degenerate = bool(m > r and vals[r - 1] - vals[r] <= GAP_TOL * max(1.0, vals[0]))
    else:
        raise ValueError(f"unknown route {route!r}")
    return Estimate(u_hat=u_hat, aggregate_eigenvalues=vals, method="stacked", degenerate_gap=degenerate)


METHODS = ("ajive", "oracle", "stacked")


def run_method(method: str, data, r: int, r_k, u_star=None) -> Estimate:
    """Dispatch by name; ``u_star`` is only consumed by ``oracle``."""
    if method == "ajive":
        return ajive(data, r, r_k)
    if method == "oracle":
        if u_star is None:
            raise DimensionMismatch("oracle method needs u_star")
        return oracle_estimate(data, r, r_k, u_star)
    if method == "stacked":
        return stacked_svd(data, r)
    raise ValueError(f"unknown method {method!r}")
