"""Deterministic sweep harness, figure presets and log-log slope fits.

A sweep varies one configuration field over a grid. Each ``(axis_index,
trial)`` cell draws an instance from seed ``mix(master_seed, axis_index,
trial)``, so cells are independent tasks. They may run on a thread pool, and
records are always emitted sorted by ``(axis_value, method)``.

Grid spacing is not given for the reproduced figures: every preset axis uses
8 log-spaced points between the stated endpoints (integers rounded and
de-duplicated).
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import seeding
from .errors import InsufficientData, JiveError, NonpositiveError, UnknownPreset
from .estimators import METHODS, run_method
from .metrics import subspace_error
from .model import JiveConfig, LoadingScheme, MisalignScheme, generate

AXES = ("n", "K", "theta", "sigma", "d")
INT_AXES = ("n", "K", "d")
CSV_HEADER = (
    "axis", "axis_value", "method", "mean_error", "std_error",
    "trials", "measured_theta_mean", "wall_ms", "status",
)
GRID_POINTS = 8
DEFAULT_TRIALS = 100
DEFAULT_MASTER_SEED = 20240601
PRESETS = ("fig1a", "fig1b", "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig5a", "fig5b")
# 0.1 puts the low-SNR floor in view at n = d = 20
PLATEAU_THETA = 0.1


@dataclass(frozen=True)
class SweepConfig:
    base: JiveConfig
    axis: str
    axis_values: tuple
    trials: int = DEFAULT_TRIALS
    methods: tuple = ("ajive",)
    master_seed: int = DEFAULT_MASTER_SEED
    record_timing: bool = False
    name: str = ""

    def __post_init__(self):
        if self.axis not in AXES:
            raise JiveError(f"axis must be one of {AXES}")
        values = tuple(int(v) if self.axis in INT_AXES else float(v) for v in self.axis_values)
        if not values or any(b <= a for a, b in zip(values, values[1:])):
            raise JiveError("axis_values must be nonempty and strictly increasing")
        if self.trials < 1:
            raise JiveError("trials must be >= 1")
        bad = set(self.methods) - set(METHODS)
        if not self.methods or bad:
            raise JiveError(f"unknown methods {sorted(bad)}")
        object.__setattr__(self, "axis_values", values)
        object.__setattr__(self, "methods", tuple(self.methods))

    def cell_config(self, axis_index: int, trial: int) -> JiveConfig:
        seed = seeding.mix_seed(self.master_seed, axis_index, trial)
        return replace(self.base, **{self.axis: self.axis_values[axis_index]}, seed=seed)


@dataclass
class SweepRecord:
    axis: str
    axis_value: float
    method: str
    mean_error: float
    std_error: float
    trials: int
    measured_theta_mean: float
    wall_ms: float = 0.0
    status: str = "ok"
    errors: list = field(default_factory=list, repr=False, compare=False)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float


def _run_cell(cfg: SweepConfig, axis_index: int, trial: int):
    """Errors per method for one cell; failures become exception names."""
    try:
        conf = cfg.cell_config(axis_index, trial)
        data = generate(conf)
    except JiveError as exc:
        return None, {m: (type(exc).__name__, 0.0) for m in cfg.methods}
    truth = data.truth
    out = {}
    for method in cfg.methods:
        t0 = time.perf_counter()
        try:
            est = run_method(method, data, conf.r, conf.r_k, truth.u_star)
            err = subspace_error(est.u_hat, truth.u_star)
            value = "DegenerateGap" if est.degenerate_gap else err
        except JiveError as exc:
            value = type(exc).__name__
        out[method] = (value, (time.perf_counter() - t0) * 1e3)
    return truth.measured_theta, out


def resolve_threads(threads: int | None = None) -> int:
    """``threads`` or ``$JIVE_THREADS``; 0 / unset means one per CPU."""
    if threads is None:
        threads = int(os.environ.get("JIVE_THREADS", "0") or 0)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def run_sweep(cfg: SweepConfig, threads: int | None = None) -> list[SweepRecord]:
    """Run every cell and aggregate per ``(axis_value, method)``.

    ``std_error`` is the standard error of the mean over successful trials
    (0 for a single trial). Failed trials are counted in ``status`` and left
    out of the averages; the sweep itself never aborts on them.
    """
    cells = [(i, t) for i in range(len(cfg.axis_values)) for t in range(cfg.trials)]
    nthreads = min(resolve_threads(threads), len(cells))
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            results = list(pool.map(lambda c: _run_cell(cfg, *c), cells))
    else:
        results = [_run_cell(cfg, *c) for c in cells]
    by_cell = dict(zip(cells, results))

    records = []
    for i, value in enumerate(cfg.axis_values):
        thetas = [by_cell[(i, t)][0] for t in range(cfg.trials)]
        thetas = [th for th in thetas if th is not None]
        for method in sorted(cfg.methods):
            errs, failures, wall = [], {}, 0.0
            for t in range(cfg.trials):
                res, ms = by_cell[(i, t)][1][method]
                wall += ms
                if isinstance(res, str):
                    failures[res] = failures.get(res, 0) + 1
                else:
                    errs.append(res)
            errs = np.asarray(errs)
            mean = float(errs.mean()) if errs.size else math.nan
            se = float(errs.std(ddof=1) / math.sqrt(errs.size)) if errs.size > 1 else 0.0
            status = "ok" if not failures else ";".join(f"{k}x{v}" for k, v in sorted(failures.items()))
            records.append(
                SweepRecord(
                    axis=cfg.axis,
                    axis_value=value,
                    method=method,
                    mean_error=mean,
                    std_error=se,
                    trials=int(errs.size),
                    measured_theta_mean=float(np.mean(thetas)) if thetas else math.nan,
                    wall_ms=wall if cfg.record_timing else 0.0,
                    status=status,
                    errors=errs.tolist(),
                )
            )
    return records


# -- presets -------------------------------------------------------------------

def log_grid(lo: float, hi: float, points: int = GRID_POINTS, integer: bool = False, even: bool = False):
    g = np.geomspace(lo, hi, points)
    if even:
        return tuple(sorted({int(2 * round(x / 2)) for x in g}))
    if integer:
        return tuple(sorted({int(round(x)) for x in g}))
    return tuple(float(x) for x in g)


def preset(name: str, trials: int = DEFAULT_TRIALS, master_seed: int = DEFAULT_MASTER_SEED) -> SweepConfig:
    """Sweep configuration reproducing one figure panel.

    ========  ==========================================  ===============
    name      fixed parameters                            axis
    ========  ==========================================  ===============
    fig1a     theta=1/2, K=100, d=20, sigma=1e-3          n in 16..400
    fig1b     theta=1/2, n=d=20, sigma=1e-3               K in 25..10000
    fig2a     theta=1e-4, K=100, d=20, sigma=1e-6         n in 16..400
    fig2b     theta=1e-4, n=d=20, sigma=1e-6              K in 25..10000
    fig2c     n=d=20, K=100, sigma=1e-6                   theta 1e-4..1e-2
    fig3a     shared loading, sigma=1e-2, AJIVE           K in 25..10000
    fig3b     oracle-hard loading, two-group, sigma=0.1,  K in 26..10000
              oracle estimator                            (even values)
    fig5a     theta=1/2, n=20, K=100, sigma=1e-3          d in 10..400
    fig5b     theta=1/2, n=d=20, K=100                    sigma 1e-6..1e-3
    ========  ==========================================  ===============

    All presets use r = r_k = 2 and gamma = 0.5; loadings are random except
    in fig3a / fig3b, which use theta = 0.1.
    """
    base = JiveConfig(n=20, d=20, K=100, r=2, r_k=2, theta=0.5, sigma=1e-3, gamma=0.5)
    n_grid = log_grid(16, 400, integer=True)
    k_grid = log_grid(25, 10000, integer=True)
    methods = ("ajive",)
    if name == "fig1a":
        base, axis, values = base, "n", n_grid
    elif name == "fig1b":
        axis, values = "K", k_grid
    elif name in ("fig2a", "fig2b", "fig2c"):
        base = replace(base, theta=1e-4, sigma=1e-6)
        axis, values = {
            "fig2a": ("n", n_grid),
            "fig2b": ("K", k_grid),
            "fig2c": ("theta", log_grid(1e-4, 1e-2)),
        }[name]
    elif name == "fig3a":
        base = replace(base, theta=PLATEAU_THETA, sigma=1e-2, loading_scheme=LoadingScheme.SHARED)
        axis, values = "K", k_grid
    elif name == "fig3b":
        base = replace(
            base, theta=PLATEAU_THETA, sigma=0.1,
            loading_scheme=LoadingScheme.ORACLE_HARD, misalign_scheme=MisalignScheme.TWO_GROUP,
        )
        axis, values, methods = "K", log_grid(25, 10000, even=True), ("oracle",)
    elif name == "fig5a":
        axis, values = "d", log_grid(10, 400, integer=True)
    elif name == "fig5b":
        axis, values = "sigma", log_grid(1e-6, 1e-3)
    else:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return SweepConfig(base=base, axis=axis, axis_values=values, trials=trials,
                       methods=methods, master_seed=master_seed, name=name)


# -- analysis -------------------------------------------------------------------

def fit_loglog(records, method: str) -> SlopeFit:
    """OLS fit of ``log(mean_error)`` on ``log(axis_value)`` for one method."""
    rows = [rec for rec in records if rec.method == method and not math.isnan(rec.mean_error)]
    if len(rows) < 3:
        raise InsufficientData(f"need >= 3 records for {method!r}, got {len(rows)}")
    x = np.array([rec.axis_value for rec in rows], dtype=float)
    y = np.array([rec.mean_error for rec in rows], dtype=float)
    if np.any(y <= 0) or np.any(x <= 0):
        raise NonpositiveError("log-log fit needs positive errors and axis values")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0))


# -- serialization ------------------------------------------------------------------

def _fmt(x) -> str:
    return f"{float(x):.17g}"


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow([
            rec.axis, _fmt(rec.axis_value), rec.method, _fmt(rec.mean_error),
            _fmt(rec.std_error), rec.trials, _fmt(rec.measured_theta_mean),
            _fmt(rec.wall_ms), rec.status,
        ])
    return buf.getvalue()


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))


def read_csv(path) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise JiveError(f"{path}: unexpected CSV header")
        return [
            SweepRecord(
                axis=row["axis"],
                axis_value=float(row["axis_value"]),
                method=row["method"],
                mean_error=float(row["mean_error"]),
                std_error=float(row["std_error"]),
                trials=int(row["trials"]),
                measured_theta_mean=float(row["measured_theta_mean"]),
                wall_ms=float(row["wall_ms"]),
                status=row["status"],
            )
            for row in reader
        ]


def plot_data(records) -> str:
    """Whitespace table: axis value, then mean and std error per method."""
    methods = sorted({rec.method for rec in records})
    values = sorted({rec.axis_value for rec in records})
    table = {(rec.axis_value, rec.method): rec for rec in records}
    axis = records[0].axis if records else "x"
    head = [axis] + [f"{m}_{col}" for m in methods for col in ("mean", "stderr")]
    lines = ["# " + " ".join(head)]
    for v in values:
        cols = [_fmt(v)]
        for m in methods:
            rec = table.get((v, m))
            cols += [_fmt(rec.mean_error), _fmt(rec.std_error)] if rec else ["nan", "nan"]
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"


def plot_data_path(csv_path) -> str:
    root, _ = os.path.splitext(str(csv_path))
    return root + ".gp"


def write_sweep(records, csv_path) -> tuple[str, str]:
    """Write the CSV and its companion ``.gp`` plot-data file."""
    write_csv(records, csv_path)
    gp = plot_data_path(csv_path)
    with open(gp, "w") as fh:
        fh.write(plot_data(records))
    return str(csv_path), gp
