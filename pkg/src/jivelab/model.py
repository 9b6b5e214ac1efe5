"""JIVE instance generation.

An instance is ``K`` matrices ``A_k = U V_k^T + U_k W_k^T + E_k`` where ``U``
(``n x r``) is the shared basis, ``U_k`` (``n x r_k``, orthogonal to ``U``)
the unique bases, ``V_k`` / ``W_k`` loadings and ``E_k`` Gaussian noise.

Per-``k`` objects are stored as stacked 3-D arrays (``u_k[k]`` is the k-th
unique basis), so a stack behaves like a list of matrices.

Random draws follow :mod:`jivelab.seeding`: each generator takes an integer
seed and derives one independent stream per matrix index, so output does not
depend on generation order.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import matrixkit as mk
from . import seeding
from .errors import (
    DimensionMismatch,
    DimensionOverflow,
    InvalidRank,
    InvalidTheta,
    JiveError,
    MatrixFormatError,
    OddK,
    SchemeConstraint,
    UnidentifiableTheta,
)
from .metrics import misalignment

RANK_TOL = 1e-8
MAX_REDRAWS = 100

# OracleHard loading: W = 0.6 V + 0.8 Z1, so V^T W = 0.6 I and sigma_min = sqrt(0.4)
HARD_OVERLAP = 0.6
HARD_COMPLEMENT = 0.8


class MisalignScheme(str, enum.Enum):
    RANDOMIZED = "randomized"
    TWO_GROUP = "two-group"


class LoadingScheme(str, enum.Enum):
    RANDOM = "random"
    SHARED = "shared"
    ORACLE_HARD = "oracle-hard"
    EXPLICIT = "explicit"  # hand-built instances; not generatable


def check_theta(theta: float, K: int) -> None:
    if theta == 0:
        raise UnidentifiableTheta("theta = 0 makes the shared subspace unidentifiable")
    if not (0 < theta <= 1 - 1 / K + 1e-15):
        raise InvalidTheta(f"theta={theta} outside (0, 1 - 1/K] for K={K}")


@dataclass(frozen=True)
class JiveConfig:
    n: int
    d: int
    K: int
    r: int
    r_k: int
    theta: float
    sigma: float = 0.0
    gamma: float = 0.5
    misalign_scheme: MisalignScheme = MisalignScheme.RANDOMIZED
    loading_scheme: LoadingScheme = LoadingScheme.RANDOM
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "misalign_scheme", MisalignScheme(self.misalign_scheme))
        object.__setattr__(self, "loading_scheme", LoadingScheme(self.loading_scheme))
        for name in ("n", "d", "K", "r", "r_k"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.r < 1 or self.r_k < 1 or self.K < 1:
            raise InvalidRank("r, r_k and K must be >= 1")
        if self.r + self.r_k > min(self.n, self.d):
            raise DimensionOverflow(f"r + r_k = {self.r + self.r_k} exceeds min(n, d)")
        if self.misalign_scheme is MisalignScheme.TWO_GROUP and self.K % 2:
            raise OddK("two-group misalignment needs an even K")
        check_theta(self.theta, self.K)
        if self.sigma < 0:
            raise JiveError("sigma must be >= 0")
        if self.gamma <= 0:
            raise JiveError("gamma must be > 0")

    def to_meta(self) -> dict:
        out = asdict(self)
        out["misalign_scheme"] = self.misalign_scheme.value
        out["loading_scheme"] = self.loading_scheme.value
        return out


@dataclass
class GroundTruth:
    u_star: np.ndarray
    u_k: np.ndarray
    v_k: np.ndarray
    w_k: np.ndarray
    a_star: np.ndarray
    measured_theta: float
    sigma_min: float
    sigma_max: float
    kappa: float
    flags: tuple = ()

    @property
    def K(self) -> int:
        return self.a_star.shape[0]

    @property
    def r(self) -> int:
        return self.u_star.shape[1]

    @property
    def r_k(self) -> int:
        return self.u_k.shape[2]

    @property
    def identifiable(self) -> bool:
        return "IdentifiabilityViolated" not in self.flags


@dataclass
class Dataset:
    a: np.ndarray
    config: JiveConfig | None = None
    truth: GroundTruth | None = None
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.a)


# -- orthonormal sampling -------------------------------------------------------

def _forbidden_basis(orthogonal_to, n: int) -> np.ndarray | None:
    if not orthogonal_to:
        return None
    blocks = [mk.as_matrix(b, "orthogonal_to") for b in orthogonal_to]
    if any(b.shape[0] != n for b in blocks):
        raise DimensionMismatch("orthogonal_to bases must have n rows")
    f = np.hstack(blocks)
    if not mk.is_orthonormal(f):
        f = mk.qr_orthonormalize(f)
    return f


def _project_twice(g: np.ndarray, f: np.ndarray | None) -> np.ndarray:
    if f is None:
        return g
    for _ in range(2):
        g = g - f @ (f.T @ g)
    return g


def gen_orthonormal(seed: int, n: int, k: int, orthogonal_to: Sequence | None = None) -> np.ndarray:
    """Random ``n x k`` orthonormal basis, optionally orthogonal to given bases.

    Gaussian fill, projection out of the forbidden span, then sign-fixed
    thin QR; rank-deficient draws are redrawn from the same stream.
    """
    f = _forbidden_basis(orthogonal_to, n)
    used = 0 if f is None else f.shape[1]
    if k < 1 or k + used > n:
        raise DimensionOverflow(f"cannot fit {k} new directions beside {used} in R^{n}")
    rng = seeding.make_rng(seed)
    for _ in range(MAX_REDRAWS):
        g = _project_twice(rng.standard_normal((n, k)), f)
        try:
            return mk.qr_orthonormalize(g)
        except mk.RankDeficient:
            continue
    raise mk.RankDeficient("could not draw a full-rank sample")


def _orthonormal_batch(seed: int, count: int, n: int, k: int, f: np.ndarray | None) -> np.ndarray:
    """``count`` independent draws of :func:`gen_orthonormal`, stream ``(seed, i)``."""
    rngs = [seeding.make_rng(seed, i) for i in range(count)]
    g = np.stack([rng.standard_normal((n, k)) for rng in rngs]) if count else np.zeros((0, n, k))
    if f is not None:
        for _ in range(2):
            g = g - f @ (f.T @ g)
    q, bad = mk.qr_orthonormalize_batch(g)
    for i in np.flatnonzero(bad):
        for _ in range(MAX_REDRAWS):
            gi = _project_twice(rngs[i].standard_normal((n, k)), f)
            try:
                q[i] = mk.qr_orthonormalize(gi)
                break
            except mk.RankDeficient:
                continue
        else:
            raise mk.RankDeficient("could not draw a full-rank sample")
    return q


# -- unique subspaces ----------------------------------------------------------

def gen_unique_randomized(seed: int, u_star, theta: float, K: int, r_k: int) -> np.ndarray:
    """``U_k = sqrt(1-theta) Z + sqrt(theta) Z_k`` with one shared ``Z``.

    ``Z`` is orthogonal to ``u_star``; each ``Z_k`` is orthogonal to both.
    The achieved misalignment is only approximately ``theta``.
    """
    u_star = mk.as_matrix(u_star, "u_star")
    n, r = u_star.shape
    check_theta(theta, K)
    if r + 2 * r_k > n:
        raise DimensionOverflow(f"r + 2 r_k = {r + 2 * r_k} exceeds n = {n}")
    z = gen_orthonormal(seeding.mix_seed(seed, 0), n, r_k, [u_star])
    f = np.hstack([u_star, z])
    z_k = _orthonormal_batch(seeding.mix_seed(seed, 1), K, n, r_k, f)
    return math.sqrt(1 - theta) * z + math.sqrt(theta) * z_k


def gen_unique_two_group(seed: int, u_star, theta: float, K: int, r_k: int) -> np.ndarray:
    """Alternate ``U_+ = c Z2 + s Z3`` (even index) and ``U_- = c Z2 - s Z3``.

    With ``c = sqrt(1-theta)``, ``s = sqrt(theta)`` and ``theta <= 1/2`` the
    misalignment is exactly ``theta`` and ``U_+^T U_- = (1 - 2 theta) I``.
    """
    u_star = mk.as_matrix(u_star, "u_star")
    n, r = u_star.shape
    if K % 2:
        raise OddK("two-group misalignment needs an even K")
    check_theta(theta, K)
    if theta > 0.5:
        raise InvalidTheta("two-group misalignment needs theta <= 1/2")
    if r + 2 * r_k > n:
        raise DimensionOverflow(f"r + 2 r_k = {r + 2 * r_k} exceeds n = {n}")
    z2 = gen_orthonormal(seeding.mix_seed(seed, 0), n, r_k, [u_star])
    z3 = gen_orthonormal(seeding.mix_seed(seed, 1), n, r_k, [u_star, z2])
    c, s = math.sqrt(1 - theta), math.sqrt(theta)
    plus, minus = c * z2 + s * z3, c * z2 - s * z3
    return np.stack([plus if k % 2 == 0 else minus for k in range(K)])


# -- loadings --------------------------------------------------------------------

def gen_loadings(seed: int, scheme, K: int, d: int, r: int, r_k: int, gamma: float = 0.5):
    """Loading stacks ``(v_k, w_k)`` of shapes ``(K, d, r)`` and ``(K, d, r_k)``.

    ``random``
        fresh orthonormal ``V_k`` and ``gamma *`` orthonormal ``W_k`` per k.
    ``shared``
        one such pair repeated for every k.
    ``oracle-hard``
        ``V`` orthonormal and ``W = 0.6 V + 0.8 Z1`` with ``Z1 ⊥ V``, repeated
        for every k (``gamma`` is ignored; this fixes sigma_min = sqrt(0.4)).
    """
    scheme = LoadingScheme(scheme)
    if r > d or r_k > d:
        raise DimensionOverflow("loading ranks exceed d")
    if scheme is LoadingScheme.RANDOM:
        v = _orthonormal_batch(seeding.mix_seed(seed, 0), K, d, r, None)
        w = gamma * _orthonormal_batch(seeding.mix_seed(seed, 1), K, d, r_k, None)
        return v, w
    if scheme is LoadingScheme.SHARED:
        v = gen_orthonormal(seeding.mix_seed(seed, 0), d, r)
        w = gamma * gen_orthonormal(seeding.mix_seed(seed, 1), d, r_k)
    elif scheme is LoadingScheme.ORACLE_HARD:
        if r != r_k:
            raise SchemeConstraint("oracle-hard loading needs r == r_k")
        if 2 * r > d:
            raise DimensionOverflow("oracle-hard loading needs 2 r <= d")
        v = gen_orthonormal(seeding.mix_seed(seed, 0), d, r)
        z1 = gen_orthonormal(seeding.mix_seed(seed, 1), d, r, [v])
        w = HARD_OVERLAP * v + HARD_COMPLEMENT * z1
    else:
        raise SchemeConstraint(f"loading scheme {scheme.value!r} cannot be generated")
    return np.repeat(v[None], K, axis=0), np.repeat(w[None], K, axis=0)


# -- assembly and noise ------------------------------------------------------

def assemble(u_star, u_k, v_k, w_k) -> GroundTruth:
    """Clean matrices ``A_k = U V_k^T + U_k W_k^T`` and their signal summary.

    ``sigma_min = min_k sigma_{r+r_k}(A_k)``, ``sigma_max = max_k sigma_1(A_k)``.
    A vanishing ``sigma_min`` adds the ``IdentifiabilityViolated`` flag.
    """
    u_star = mk.as_matrix(u_star, "u_star")
    u_k, v_k, w_k = (np.asarray(x, dtype=np.float64) for x in (u_k, v_k, w_k))
    n, r = u_star.shape
    if u_k.ndim != 3 or v_k.ndim != 3 or w_k.ndim != 3:
        raise DimensionMismatch("u_k, v_k, w_k must be (K, ., .) stacks")
    K, _, r_k = u_k.shape
    if u_k.shape[1] != n or v_k.shape[0] != K or w_k.shape[0] != K:
        raise DimensionMismatch("inconsistent K or n across components")
    if v_k.shape[2] != r or w_k.shape[2] != r_k or v_k.shape[1] != w_k.shape[1]:
        raise DimensionMismatch("loading shapes do not match (d, r) / (d, r_k)")
    a_star = u_star @ np.swapaxes(v_k, 1, 2) + u_k @ np.swapaxes(w_k, 1, 2)
    sv = np.linalg.svd(a_star, compute_uv=False)
    j = r + r_k - 1
    sigma_max = float(sv[:, 0].max())
    sigma_min = float(sv[:, j].min()) if j < sv.shape[1] else 0.0
    flags = []
    if sigma_min < RANK_TOL:
        flags.append("IdentifiabilityViolated")
    kappa = sigma_max / sigma_min if sigma_min > 0 else math.inf
    return GroundTruth(
        u_star=u_star,
        u_k=u_k,
        v_k=v_k,
        w_k=w_k,
        a_star=a_star,
        measured_theta=misalignment(u_k),
        sigma_min=sigma_min,
        sigma_max=sigma_max,
        kappa=kappa,
        flags=tuple(flags),
    )


def add_noise(seed: int, truth: GroundTruth, sigma: float, config: JiveConfig | None = None) -> Dataset:
    """Observed matrices ``A_k = A_k^* + sigma G_k``; ``G_k`` from stream ``(seed, k)``."""
    if sigma < 0:
        raise JiveError("sigma must be >= 0")
    a = truth.a_star.copy()
    if sigma > 0:
        shape = a.shape[1:]
        for k in range(a.shape[0]):
            a[k] += sigma * seeding.make_rng(seed, k).standard_normal(shape)
    return Dataset(a=a, config=config, truth=truth)


def generate(config: JiveConfig) -> Dataset:
    """Full instance for a configuration, deterministic in ``config.seed``."""
    seed = config.seed
    u_star = gen_orthonormal(seeding.mix_seed(seed, seeding.U_STAR), config.n, config.r)
    unique_seed = seeding.mix_seed(seed, seeding.UNIQUE)
    if config.misalign_scheme is MisalignScheme.TWO_GROUP:
        u_k = gen_unique_two_group(unique_seed, u_star, config.theta, config.K, config.r_k)
    else:
        u_k = gen_unique_randomized(unique_seed, u_star, config.theta, config.K, config.r_k)
    v_k, w_k = gen_loadings(
        seeding.mix_seed(seed, seeding.LOADINGS),
        config.loading_scheme,
        config.K,
        config.d,
        config.r,
        config.r_k,
        config.gamma,
    )
    truth = assemble(u_star, u_k, v_k, w_k)
    return add_noise(seeding.mix_seed(seed, seeding.NOISE), truth, config.sigma, config)


def counterexample_stacked(epsilon: float) -> Dataset:
    """Two noiseless 3x3 matrices on which stacked SVD misses ``e1``.

    ``A_1 = e1 e1^T + eps (0,1,-1)^T (1,1,1)`` and
    ``A_2 = e1 e1^T + eps (0,1,1)^T (1,1,1)``; shared basis ``e1``.
    """
    if not epsilon > 0:
        raise JiveError("epsilon must be > 0")
    e1 = np.array([[1.0], [0.0], [0.0]])
    ones = np.ones((3, 1))
    dirs = [np.array([[0.0], [1.0], [-1.0]]), np.array([[0.0], [1.0], [1.0]])]
    root2 = math.sqrt(2.0)
    u_k = np.stack([dv / root2 for dv in dirs])
    v_k = np.stack([e1, e1])
    w_k = np.stack([epsilon * root2 * ones] * 2)
    truth = assemble(e1, u_k, v_k, w_k)
    a = np.stack([e1 @ e1.T + epsilon * dv @ ones.T for dv in dirs])
    config = JiveConfig(
        n=3, d=3, K=2, r=1, r_k=1, theta=0.5, sigma=0.0,
        misalign_scheme=MisalignScheme.TWO_GROUP, loading_scheme=LoadingScheme.EXPLICIT,
    )
    return Dataset(a=a, config=config, truth=truth, meta={"epsilon": epsilon})


# -- on-disk layout ----------------------------------------------------------

META_FILE = "truth.meta"
U_STAR_FILE = "u_star.mat"


def _meta_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def format_meta(values: dict) -> str:
    lines = []
    for key, val in values.items():
        if isinstance(val, float):
            val = f"{val:.17g}"
        lines.append(f"{key}={val}")
    return "\n".join(lines) + "\n"


def parse_meta(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise MatrixFormatError(f"bad meta line: {line!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = _meta_value(val.strip())
    return out


def save_dataset(data: Dataset, out_dir) -> list[str]:
    """Write ``A_<k>.mat``, ``truth.meta`` and (when known) ``u_star.mat``."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for k, a in enumerate(data.a):
        path = os.path.join(out_dir, f"A_{k}.mat")
        mk.write_matrix(path, a)
        written.append(path)
    meta = {}
    if data.truth is not None:
        t = data.truth
        meta.update(
            measured_theta=float(t.measured_theta),
            sigma_min=float(t.sigma_min),
            sigma_max=float(t.sigma_max),
            kappa=float(t.kappa),
        )
        mk.write_matrix(os.path.join(out_dir, U_STAR_FILE), t.u_star)
        written.append(os.path.join(out_dir, U_STAR_FILE))
    if data.config is not None:
        meta.update(data.config.to_meta())
    meta.update(data.meta)
    path = os.path.join(out_dir, META_FILE)
    with open(path, "w") as fh:
        fh.write(format_meta(meta))
    written.append(path)
    return written


def load_dataset(in_dir):
    """Read a directory written by :func:`save_dataset`.

    Returns ``(matrices, meta, u_star)``; ``u_star`` is ``None`` if absent.
    """
    meta_path = os.path.join(in_dir, META_FILE)
    meta = {}
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            meta = parse_meta(fh.read())
    mats = []
    k = 0
    while os.path.exists(os.path.join(in_dir, f"A_{k}.mat")):
        mats.append(mk.read_matrix(os.path.join(in_dir, f"A_{k}.mat")))
        k += 1
    if not mats:
        raise MatrixFormatError(f"no A_<k>.mat files in {in_dir}")
    u_path = os.path.join(in_dir, U_STAR_FILE)
    u_star = mk.read_matrix(u_path) if os.path.exists(u_path) else None
    return mats, meta, u_star
