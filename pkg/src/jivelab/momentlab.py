"""Monte Carlo checks of Gaussian moment identities.

``E`` is an ``n1 x n2`` matrix of i.i.d. ``N(0, sigma^2)`` entries. A
monomial is a chain ``X_1 A X_2 [B X_3 C X_4]`` where each ``X_t`` is ``E``
or ``E^T``; the transpose pattern identifies the identity:

========  =========================  ================
id        monomial                   pattern (1 = ^T)
========  =========================  ================
EAE       E A E                      (0, 0)
EAET      E A E^T                    (0, 1)
TrEAE     Tr(E A) E                  --
D4_1      E A E^T B E C E^T          (0, 1, 0, 1)
D4_2      E A E B E^T C E^T          (0, 0, 1, 1)
D4_3      E^T A E B E C E^T          (1, 0, 0, 1)
D4_4      E^T A E B E C E            (1, 0, 0, 0)
D4_5      E A E^T B E C E            (0, 1, 0, 0)
D4_6      E A E B E^T C E            (0, 0, 1, 0)
D4_7      E A E B E C E^T            (0, 0, 0, 1)
D4_8      E A E B E C E              (0, 0, 0, 0)
ODD3      E A E B E  (mean zero)     (0, 0, 0)
========  =========================  ================
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import seeding
from .errors import DimensionMismatch, JiveError, UnknownIdentity

PATTERNS = {
    "EAE": (0, 0),
    "EAET": (0, 1),
    "TrEAE": (0,),
    "D4_1": (0, 1, 0, 1),
    "D4_2": (0, 0, 1, 1),
    "D4_3": (1, 0, 0, 1),
    "D4_4": (1, 0, 0, 0),
    "D4_5": (0, 1, 0, 0),
    "D4_6": (0, 0, 1, 0),
    "D4_7": (0, 0, 0, 1),
    "D4_8": (0, 0, 0, 0),
    "ODD3": (0, 0, 0),
}
DEG2 = ("EAE", "EAET", "TrEAE")
DEG4 = tuple(f"D4_{i}" for i in range(1, 9))
BAND = 5.0
MIN_SAMPLES = 10_000


def _pattern(identity: str):
    try:
        return PATTERNS[identity]
    except KeyError:
        raise UnknownIdentity(f"unknown identity {identity!r}") from None


def _x_shape(t: int, n1: int, n2: int):
    return (n2, n1) if t else (n1, n2)


def operand_shapes(identity: str, n1: int, n2: int) -> list[tuple[int, int]]:
    """Shapes of the coefficient matrices the monomial needs."""
    p = _pattern(identity)
    if identity == "TrEAE":
        return [(n2, n1)]
    return [(_x_shape(p[t], n1, n2)[1], _x_shape(p[t + 1], n1, n2)[0]) for t in range(len(p) - 1)]


def infer_dims(identity: str, mats, n1: int | None = None, n2: int | None = None):
    """Recover ``(n1, n2)`` from the operand shapes and validate them."""
    p = _pattern(identity)
    known = {"n1": n1, "n2": n2}

    def put(slot, value):
        if known[slot] is None:
            known[slot] = value
        elif known[slot] != value:
            raise DimensionMismatch(f"inconsistent {slot}: {known[slot]} vs {value}")

    if identity == "TrEAE":
        (a,) = mats
        put("n2", a.shape[0])
        put("n1", a.shape[1])
    else:
        if len(mats) != len(p) - 1:
            raise DimensionMismatch(f"{identity} takes {len(p) - 1} coefficient matrices")
        for t, m in enumerate(mats):
            put("n1" if p[t] else "n2", m.shape[0])
            put("n2" if p[t + 1] else "n1", m.shape[1])
    if known["n1"] is None or known["n2"] is None:
        raise DimensionMismatch("n1 / n2 cannot be inferred; pass them explicitly")
    return known["n1"], known["n2"]


def closed_form_deg2(identity: str, a, sigma: float, n1: int | None = None, n2: int | None = None):
    """``E[EAE] = s^2 A^T``, ``E[EAE^T] = s^2 Tr(A) I``, ``E[Tr(EA) E] = s^2 A^T``."""
    if identity not in DEG2:
        raise UnknownIdentity(f"{identity!r} is not a degree-2 identity")
    a = np.asarray(a, dtype=np.float64)
    n1, n2 = infer_dims(identity, [a], n1, n2)
    s2 = sigma**2
    if identity == "EAET":
        return s2 * np.trace(a) * np.eye(n1)
    return s2 * a.T


def closed_form_deg4(identity: str, a, b, c, sigma: float):
    """Closed-form expectation of one of the eight degree-4 monomials."""
    if identity not in DEG4:
        raise UnknownIdentity(f"{identity!r} is not a degree-4 identity")
    A, B, C = (np.asarray(m, dtype=np.float64) for m in (a, b, c))
    n1, n2 = infer_dims(identity, [A, B, C])
    tr = np.trace
    eye = np.eye(n2 if PATTERNS[identity][0] else n1)
    if identity == "D4_1":
        out = tr(C) * tr(A) * B + tr(A @ C.T) * B.T + tr(B) * tr(A @ C) * eye
    elif identity == "D4_2":
        out = A.T @ B @ C.T + C @ B @ A + tr(B) * tr(A @ C) * eye
    elif identity == "D4_3":
        out = tr(C) * tr(A) * B + C @ B @ A + C.T @ B @ A.T
    elif identity == "D4_4":
        out = tr(A) * B @ C.T + C @ A.T @ B.T + tr(A @ B.T @ C) * eye
    elif identity == "D4_5":
        out = tr(A) * B @ C.T + B.T @ C.T @ A + tr(B) * C.T @ A.T
    elif identity == "D4_6":
        out = tr(C) * A.T @ B + C @ A.T @ B.T + tr(B) * C.T @ A.T
    elif identity == "D4_7":
        out = tr(C) * A.T @ B + B.T @ C.T @ A + tr(A @ B.T @ C) * eye
    else:
        out = A.T @ B @ C.T + tr(A @ C.T) * B.T + C.T @ B @ A.T
    return sigma**4 * out


def closed_form(identity: str, mats, sigma: float, n1=None, n2=None):
    if identity in DEG2:
        return closed_form_deg2(identity, mats[0], sigma, n1, n2)
    if identity in DEG4:
        return closed_form_deg4(identity, *mats, sigma)
    if identity == "ODD3":
        n1, n2 = infer_dims(identity, mats, n1, n2)
        return np.zeros((n1, n2))
    raise UnknownIdentity(f"unknown identity {identity!r}")


def evaluate_monomial(identity: str, e: np.ndarray, mats) -> np.ndarray:
    """Monomial value for a stack of noise draws ``e`` of shape ``(B, n1, n2)``."""
    if identity == "TrEAE":
        tr = np.einsum("bij,ji->b", e, mats[0])
        return tr[:, None, None] * e
    p = _pattern(identity)
    et = np.swapaxes(e, 1, 2)
    out = et if p[0] else e
    for t, m in enumerate(mats):
        out = (out @ m) @ (et if p[t + 1] else e)
    return out


@dataclass
class MomentReport:
    identity_id: str
    closed_form: np.ndarray
    mc_estimate: np.ndarray
    max_abs_dev: float
    max_std_err: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.max_abs_dev <= BAND * self.max_std_err

    def lines(self) -> list[str]:
        return [
            f"identity={self.identity_id}",
            f"samples={self.samples}",
            f"max_abs_dev={self.max_abs_dev:.17g}",
            f"max_std_err={self.max_std_err:.17g}",
            f"band={BAND:g}",
            f"passed={'yes' if self.passed else 'no'}",
        ]


def mc_verify(
    identity: str,
    a,
    b=None,
    c=None,
    sigma: float = 1.0,
    n1: int | None = None,
    n2: int | None = None,
    samples: int = 1_000_000,
    seed: int = 0,
    batch: int = 50_000,
) -> MomentReport:
    """Average the monomial over ``samples`` noise draws and compare.

    Batch ``i`` draws from stream ``(seed, i)``; batches are reduced in
    index order, so the report is a pure function of the arguments.
    """
    if samples < MIN_SAMPLES:
        raise JiveError(f"need at least {MIN_SAMPLES} samples")
    mats = [np.asarray(m, dtype=np.float64) for m in (a, b, c) if m is not None]
    n1, n2 = infer_dims(identity, mats, n1, n2)
    cf = closed_form(identity, mats, sigma, n1, n2)
    total = np.zeros_like(cf)
    total_sq = np.zeros_like(cf)
    done, i = 0, 0
    while done < samples:
        m = min(batch, samples - done)
        e = sigma * seeding.make_rng(seed, seeding.MOMENTS, i).standard_normal((m, n1, n2))
        vals = evaluate_monomial(identity, e, mats)
        total += vals.sum(axis=0)
        total_sq += np.square(vals).sum(axis=0)
        done += m
        i += 1
    mean = total / samples
    var = np.maximum(total_sq / samples - mean**2, 0.0) * samples / (samples - 1)
    return MomentReport(
        identity_id=identity,
        closed_form=cf,
        mc_estimate=mean,
        max_abs_dev=float(np.max(np.abs(mean - cf))),
        max_std_err=float(np.max(np.sqrt(var / samples))),
        samples=samples,
    )


def random_operands(identity: str, n1: int, n2: int, seed: int):
    """Standard-Gaussian coefficient matrices shaped for ``identity``."""
    rng = seeding.make_rng(seed, seeding.MOMENTS, -1)
    return [rng.standard_normal(shape) for shape in operand_shapes(identity, n1, n2)]
