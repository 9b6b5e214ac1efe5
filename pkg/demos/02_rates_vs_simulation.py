"""Empirical error against the first-order rate (sigma/sigma_min) sqrt(n/K + r/(K theta)).

Run: python demos/02_rates_vs_simulation.py   (about 10 s)
"""

# %% Setup
import numpy as np

from jivelab import bench, metrics
from jivelab.bench import SweepConfig
from jivelab.model import JiveConfig

base = JiveConfig(n=20, d=20, K=100, r=2, r_k=2, theta=0.5, sigma=1e-3)
trials = 10


def rate(cfg, sigma_min):
    ri = metrics.RateInputs(n=cfg.n, d=cfg.d, K=cfg.K, r=cfg.r, r_avg=cfg.r_k,
                            theta=cfg.theta, sigma=cfg.sigma, sigma_min=sigma_min)
    return metrics.bound_first_order(ri)


# %% Error grows like sqrt(n) at fixed K
sweep = SweepConfig(base=base, axis="n", axis_values=(16, 32, 64, 128, 256), trials=trials)
recs = bench.run_sweep(sweep)
print(" n    mean error   first-order rate (sigma_min = gamma)")
for rec in recs:
    cfg = bench.replace(base, n=int(rec.axis_value))
    print(f"{int(rec.axis_value):4d}  {rec.mean_error:.3e}    {rate(cfg, base.gamma):.3e}")
fit = bench.fit_loglog(recs, "ajive")
print(f"log-log slope {fit.slope:.3f} (R^2 {fit.r_squared:.3f})")

# %% Error shrinks like 1/sqrt(K) at fixed n
sweep = SweepConfig(base=base, axis="K", axis_values=(25, 100, 400, 1600), trials=trials)
recs = bench.run_sweep(sweep)
fit = bench.fit_loglog(recs, "ajive")
print("K:", [int(r.axis_value) for r in recs])
print("error:", np.array([r.mean_error for r in recs]))
print(f"log-log slope {fit.slope:.3f} (R^2 {fit.r_squared:.3f})")

# %% The minimax lower bound has the same first-order shape, with constant 1/20
ri = metrics.RateInputs(n=20, d=20, K=100, r=2, r_avg=2, theta=0.5, sigma=1e-3, sigma_min=0.5)
print(f"first-order {metrics.bound_first_order(ri):.3e}  minimax {metrics.minimax_lower(ri):.3e}")
