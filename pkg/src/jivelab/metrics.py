"""Subspace error, misalignment, identifiability checks and rate formulas.

The rate functions evaluate the theoretical error expressions with every
unspecified absolute constant set to 1 and natural logarithms. They are
*rate shapes*: use them to compare scalings, not as absolute thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import matrixkit as mk
from .errors import DimensionMismatch, EmptyList, JiveError

IDENT_TOL = 1e-8
EXHAUSTIVE_TOL = 1e-10


def subspace_error(a, b) -> float:
    """Spectral norm ``||a a^T - b b^T||`` of the projector difference.

    For equal ranks this equals ``||(I - a a^T) b||``, the sine of the
    largest principal angle, which is evaluated directly to keep small
    errors accurate.
    """
    a = mk.as_matrix(a, "a")
    b = mk.as_matrix(b, "b")
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"bases live in R^{a.shape[0]} and R^{b.shape[0]}")
    if a.shape == b.shape and np.array_equal(a, b):
        return 0.0
    if a.shape[1] == b.shape[1]:
        err = mk.spectral_norm(b - a @ (a.T @ b))
    else:
        err = mk.spectral_norm(a @ a.T - b @ b.T)
    return min(err, 1.0)


def average_projector(u_list) -> np.ndarray:
    """``(1/K) sum_k U_k U_k^T`` for a list or ``(K, n, r_k)`` stack."""
    if len(u_list) == 0:
        raise EmptyList("need at least one basis")
    if isinstance(u_list, np.ndarray) and u_list.ndim == 3:
        K, n, rk = u_list.shape
        flat = np.swapaxes(u_list, 0, 1).reshape(n, K * rk)
    else:
        mats = [mk.as_matrix(u) for u in u_list]
        if len({m.shape[0] for m in mats}) != 1:
            raise DimensionMismatch("bases must share the row dimension")
        flat = np.concatenate(mats, axis=1)
    return flat @ flat.T / len(u_list)


def misalignment(u_list) -> float:
    """``1 - ||(1/K) sum_k U_k U_k^T||``; 0 when aligned, ``1 - 1/K`` at most."""
    avg = average_projector(u_list)
    return float(1.0 - mk.sym_eigvals_desc(avg)[0])


@dataclass
class IdentifiabilityReport:
    faithful_rank: bool
    shared_in_colspace: bool
    exhaustive: bool
    sigma_rank: list = field(default_factory=list)
    colspace_residual: list = field(default_factory=list)
    misalignment: float = 0.0

    @property
    def passed(self) -> bool:
        return self.faithful_rank and self.shared_in_colspace and self.exhaustive

    def lines(self) -> list[str]:
        return [
            f"faithful_rank={'pass' if self.faithful_rank else 'fail'}",
            f"shared_in_colspace={'pass' if self.shared_in_colspace else 'fail'}",
            f"exhaustive={'pass' if self.exhaustive else 'fail'}",
            f"min_sigma_rank={min(self.sigma_rank):.17g}",
            f"max_colspace_residual={max(self.colspace_residual):.17g}",
            f"misalignment={self.misalignment:.17g}",
            f"identifiable={'yes' if self.passed else 'no'}",
        ]


def identifiability_check(truth) -> IdentifiabilityReport:
    """Check rank faithfulness, ``col(U) ⊆ col(A_k)`` and misalignment > 0.

    Never raises on a failing instance; the verdicts are in the report.
    """
    u_star = truth.u_star
    r = u_star.shape[1]
    sig, resid = [], []
    for a, u_k in zip(truth.a_star, truth.u_k):
        rank = r + u_k.shape[1]
        u, s, _ = np.linalg.svd(a, full_matrices=False)
        sig.append(float(s[rank - 1]) if rank <= s.size else 0.0)
        basis = u[:, :rank]
        resid.append(mk.spectral_norm(u_star - basis @ (basis.T @ u_star)))
    theta = misalignment(truth.u_k)
    return IdentifiabilityReport(
        faithful_rank=min(sig) >= IDENT_TOL,
        shared_in_colspace=max(resid) <= IDENT_TOL,
        exhaustive=theta > EXHAUSTIVE_TOL,
        sigma_rank=sig,
        colspace_residual=resid,
        misalignment=theta,
    )


# -- rate formulas ---------------------------------------------------------------

@dataclass(frozen=True)
class RateInputs:
    n: float
    d: float
    K: float
    r: float
    r_avg: float
    theta: float
    sigma: float
    sigma_min: float
    kappa: float = 1.0

    def __post_init__(self):
        for name in ("n", "d", "K", "r", "r_avg", "sigma_min"):
            if not getattr(self, name) > 0:
                raise JiveError(f"{name} must be positive")
        if not 0 < self.theta <= 1:
            raise JiveError("theta must lie in (0, 1]")
        if self.sigma < 0:
            raise JiveError("sigma must be >= 0")
        if self.kappa < 1:
            raise JiveError("kappa must be >= 1")

    @property
    def N(self) -> float:
        return max(self.n, self.d)


def bound_first_order(ri: RateInputs) -> float:
    """``(sigma / sigma_min) sqrt(n/K + r/(K theta))``."""
    return ri.sigma / ri.sigma_min * math.sqrt(ri.n / ri.K + ri.r / (ri.K * ri.theta))


def bound_second_order(ri: RateInputs) -> float:
    """``sigma^2 n / sigma_min^2 / (theta min(1, K theta))``; survives K -> inf."""
    return ri.sigma**2 * ri.n / ri.sigma_min**2 / (ri.theta * min(1.0, ri.K * ri.theta))


def bound_theorem1(ri: RateInputs) -> float:
    """Full AJIVE upper bound with constant 1 and the ``log^{5/2} N`` factor."""
    kt = ri.K * ri.theta
    inner = (
        ri.n / ri.K
        + (ri.r + ri.r_avg) / kt
        + min(ri.r * ri.r_avg / kt, ri.r / kt**2)
    )
    first = ri.sigma / ri.sigma_min * math.sqrt(inner)
    second = (
        ri.sigma**2 / ri.sigma_min**2
        * ri.kappa**2 / (ri.theta * min(1.0, kt))
        * (math.sqrt(ri.n * ri.d) + ri.n)
    )
    return math.log(ri.N) ** 2.5 * (first + second)


def minimax_lower(ri: RateInputs) -> float:
    """Two-term minimax lower bound (constants 1/20 and 1/50 as stated)."""
    kt = ri.K * ri.theta
    first = ri.sigma / (20 * ri.sigma_min) * math.sqrt(ri.n / ri.K + ri.r / kt)
    second = ri.sigma**2 / (50 * ri.sigma_min**2) * math.sqrt(ri.n * ri.d / ri.K + ri.r * ri.d / kt)
    return first + second


def oracle_lower(ri: RateInputs, d: float | None = None) -> float:
    """Oracle-estimator lower bound ``s^4 n d / smin^4 - (log n / sqrt K) s sqrt(n) / smin``.

    Constants are 1 and the value is floored at 0. ``d`` defaults to ``n``,
    which gives the ``sigma^4 n^2`` form; order-of-magnitude only.
    """
    d = ri.n if d is None else d
    plateau = ri.sigma**4 * ri.n * d / ri.sigma_min**4
    decay = math.log(ri.n) / math.sqrt(ri.K) * ri.sigma * math.sqrt(ri.n) / ri.sigma_min
    return max(0.0, plateau - decay)
