"""Command-line entry point: ``jivelab <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 numerical failure. Results go to
stdout as ``key=value`` lines (or files); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import bench, estimators, metrics, model, momentlab
from . import matrixkit as mk
from .errors import JiveError, MatrixFormatError

HELP_WIDTH = 80
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _formatter(prog):
    return argparse.HelpFormatter(prog, width=HELP_WIDTH)


def _add_instance_flags(p, required=True):
    g = p.add_argument_group("instance")
    g.add_argument("--n", type=int, required=required, help="row dimension")
    g.add_argument("--d", type=int, required=required, help="columns per matrix")
    g.add_argument("--K", type=int, required=required, help="number of matrices")
    g.add_argument("--r", type=int, required=required, help="shared rank")
    g.add_argument("--rk", type=int, required=required, help="unique rank per matrix")
    g.add_argument("--theta", type=float, required=required, help="target misalignment in (0, 1-1/K]")
    g.add_argument("--sigma", type=float, default=0.0, help="noise standard deviation (default 0)")
    g.add_argument("--gamma", type=float, default=0.5, help="unique loading scale (default 0.5)")
    g.add_argument("--misalign", choices=[s.value for s in model.MisalignScheme],
                   default="randomized", help="unique-subspace construction")
    g.add_argument("--loading", choices=[s.value for s in model.LoadingScheme if s.value != "explicit"],
                   default="random", help="loading scheme")
    g.add_argument("--seed", type=int, default=0, help="instance seed (default 0)")


def _instance_config(args) -> model.JiveConfig:
    return model.JiveConfig(
        n=args.n, d=args.d, K=args.K, r=args.r, r_k=args.rk, theta=args.theta,
        sigma=args.sigma, gamma=args.gamma, misalign_scheme=args.misalign,
        loading_scheme=args.loading, seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jivelab", description="Shared-subspace estimation under the JIVE model.",
                     formatter_class=_formatter)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("gen", help="generate an instance", formatter_class=_formatter,
                       description="Write A_<k>.mat, u_star.mat and truth.meta for one instance.")
    _add_instance_flags(p, required=False)
    p.add_argument("--counterexample", type=float, metavar="EPS",
                   help="write the 3x3 stacked-SVD counterexample instead")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("estimate", help="run an estimator on generated files", formatter_class=_formatter,
                       description="Estimate the shared subspace from A_<k>.mat files.")
    p.add_argument("--method", choices=estimators.METHODS, required=True, help="estimator")
    p.add_argument("--dir", required=True, help="directory written by 'gen'")
    p.add_argument("--r", type=int, help="shared rank (default: from truth.meta)")
    p.add_argument("--rk", type=int, help="unique rank (default: from truth.meta)")
    p.add_argument("--out", help="directory for u_hat.mat (default: --dir)")

    p = sub.add_parser("sweep", help="run a custom parameter sweep", formatter_class=_formatter,
                       description="Sweep one parameter and write CSV plus .gp plot data.")
    _add_instance_flags(p)
    p.add_argument("--axis", choices=bench.AXES, required=True, help="parameter to vary")
    p.add_argument("--values", required=True, help="comma-separated increasing axis values")
    _add_run_flags(p)

    p = sub.add_parser("preset", help="run a figure preset", formatter_class=_formatter,
                       description="Run one of the figure presets and write CSV plus .gp plot data.")
    p.add_argument("name", choices=bench.PRESETS, help="preset name")
    _add_run_flags(p, methods=False)

    p = sub.add_parser("slope", help="fit a log-log slope to a sweep CSV", formatter_class=_formatter,
                       description="Least-squares slope of log(mean_error) against log(axis_value).")
    p.add_argument("csv", help="CSV written by 'sweep' or 'preset'")
    p.add_argument("--method", choices=estimators.METHODS, default="ajive", help="method rows to fit")

    p = sub.add_parser("verify", help="print the identifiability report", formatter_class=_formatter,
                       description="Regenerate an instance and check identifiability.")
    _add_instance_flags(p, required=False)
    p.add_argument("--counterexample", type=float, metavar="EPS",
                   help="check the 3x3 stacked-SVD counterexample instead")

    p = sub.add_parser("moments", help="Monte Carlo check of a moment identity", formatter_class=_formatter,
                       description="Compare a Gaussian moment closed form against simulation.")
    p.add_argument("--identity", choices=list(momentlab.PATTERNS), required=True, help="identity id")
    p.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo samples (default 1e6)")
    p.add_argument("--seed", type=int, default=0, help="seed for operands and noise (default 0)")
    p.add_argument("--sigma", type=float, default=1.0, help="noise standard deviation (default 1)")
    p.add_argument("--n1", type=int, default=3, help="noise rows (default 3)")
    p.add_argument("--n2", type=int, default=4, help="noise columns (default 4)")
    return parser


def _add_run_flags(p, methods=True):
    g = p.add_argument_group("run")
    g.add_argument("--trials", type=int, default=bench.DEFAULT_TRIALS, help="trials per grid point (default 100)")
    if methods:
        g.add_argument("--methods", default="ajive", help="comma-separated subset of ajive,oracle,stacked")
    g.add_argument("--master-seed", type=int, default=bench.DEFAULT_MASTER_SEED, help="sweep master seed")
    g.add_argument("--timing", action="store_true", help="record wall_ms (output no longer byte-stable)")
    g.add_argument("--threads", type=int, default=None, help="worker threads (default $JIVE_THREADS, 0 = auto)")
    g.add_argument("--out", required=True, help="CSV output path")


def _emit(lines):
    sys.stdout.write("".join(f"{ln}\n" for ln in lines))


def _cmd_gen(args):
    if args.counterexample is not None:
        data = model.counterexample_stacked(args.counterexample)
    else:
        _require_instance(args)
        data = model.generate(_instance_config(args))
    for path in model.save_dataset(data, args.out):
        print(f"wrote={path}")


def _require_instance(args):
    missing = [f"--{k}" for k in ("n", "d", "K", "r", "rk", "theta") if getattr(args, k) is None]
    if missing:
        raise UsageError(f"missing required flags: {' '.join(missing)}")


def _cmd_estimate(args):
    mats, meta, u_star = model.load_dataset(args.dir)
    r = args.r if args.r is not None else meta.get("r")
    rk = args.rk if args.rk is not None else meta.get("r_k")
    if r is None or rk is None:
        raise UsageError("ranks unknown: pass --r and --rk or provide truth.meta")
    if args.method == "oracle" and u_star is None:
        raise UsageError("oracle method needs u_star.mat")
    t0 = time.perf_counter()
    est = estimators.run_method(args.method, mats, int(r), int(rk), u_star)
    wall = (time.perf_counter() - t0) * 1e3
    out_dir = args.out or args.dir
    os.makedirs(out_dir, exist_ok=True)
    mk.write_matrix(os.path.join(out_dir, "u_hat.mat"), est.u_hat)
    err = metrics.subspace_error(est.u_hat, u_star) if u_star is not None else float("nan")
    print(f"method={args.method} error={err:.17g} gap={est.gap:.17g} "
          f"degenerate_gap={'yes' if est.degenerate_gap else 'no'} wall_ms={wall:.3f}")


def _run_and_write(cfg, args):
    records = bench.run_sweep(cfg, threads=args.threads)
    csv_path, gp_path = bench.write_sweep(records, args.out)
    print(f"wrote={csv_path}")
    print(f"wrote={gp_path}")


def _cmd_sweep(args):
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise UsageError("--values must be comma-separated numbers") from None
    base = _instance_config(args)
    cfg = bench.SweepConfig(
        base=base, axis=args.axis, axis_values=values, trials=args.trials,
        methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
        master_seed=args.master_seed, record_timing=args.timing,
    )
    _run_and_write(cfg, args)


def _cmd_preset(args):
    cfg = bench.preset(args.name, trials=args.trials, master_seed=args.master_seed)
    if args.timing:
        cfg = bench.replace(cfg, record_timing=True)
    _run_and_write(cfg, args)


def _cmd_slope(args):
    fit = bench.fit_loglog(bench.read_csv(args.csv), args.method)
    _emit([f"method={args.method}", f"slope={fit.slope:.17g}",
           f"intercept={fit.intercept:.17g}", f"r_squared={fit.r_squared:.17g}"])


def _cmd_verify(args):
    if args.counterexample is not None:
        truth = model.counterexample_stacked(args.counterexample).truth
    else:
        _require_instance(args)
        truth = model.generate(_instance_config(args)).truth
    _emit(metrics.identifiability_check(truth).lines())


def _cmd_moments(args):
    ops = momentlab.random_operands(args.identity, args.n1, args.n2, args.seed)
    rep = momentlab.mc_verify(args.identity, *ops, sigma=args.sigma, n1=args.n1, n2=args.n2,
                              samples=args.samples, seed=args.seed)
    _emit(rep.lines())


COMMANDS = {
    "gen": _cmd_gen,
    "estimate": _cmd_estimate,
    "sweep": _cmd_sweep,
    "preset": _cmd_preset,
    "slope": _cmd_slope,
    "verify": _cmd_verify,
    "moments": _cmd_moments,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (MatrixFormatError, OSError) as exc:
        # unreadable or malformed input files are the caller's problem
        print(f"jivelab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except JiveError as exc:
        print(f"jivelab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
