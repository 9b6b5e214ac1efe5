"""At low SNR the error stops improving with K when loadings are shared.

Random loadings average the per-matrix SVD bias away; shared loadings make
every matrix biased in the same direction, so adding matrices does not help.

Run: python demos/03_low_snr_plateau.py   (about 20 s)
"""

# %% Setup
from jivelab import bench
from jivelab.model import LoadingScheme

Ks = (25, 100, 400, 1600, 3200)
trials = 5

# %% Shared vs random loading under AJIVE, sigma = 0.01
shared = bench.preset("fig3a", trials=trials)
shared = bench.replace(shared, axis_values=Ks)
random_ = bench.replace(shared, base=bench.replace(shared.base, loading_scheme=LoadingScheme.RANDOM))

rec_shared = bench.run_sweep(shared)
rec_random = bench.run_sweep(random_)
print("   K   shared      random")
for a, b in zip(rec_shared, rec_random):
    print(f"{int(a.axis_value):5d}  {a.mean_error:.3e}   {b.mean_error:.3e}")

# %% Slopes: near zero for shared, near -1/2 for random
print(f"shared slope {bench.fit_loglog(rec_shared, 'ajive').slope:.3f}")
print(f"random slope {bench.fit_loglog(rec_random, 'ajive').slope:.3f}")

# %% The oracle estimator knows U and still plateaus on the hard loading design
hard = bench.replace(bench.preset("fig3b", trials=trials), axis_values=(26, 100, 400, 1600, 3200))
for rec in bench.run_sweep(hard):
    print(f"oracle-hard K={int(rec.axis_value):5d}  error {rec.mean_error:.3e}")
