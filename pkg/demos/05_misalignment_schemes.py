"""Two ways to build unique subspaces with a target misalignment theta.

Run: python demos/05_misalignment_schemes.py
"""

# %% Randomized scheme: U_k = sqrt(1-theta) Z + sqrt(theta) Z_k, theta only approximate
import numpy as np

from jivelab import metrics, model

u_star = model.gen_orthonormal(0, 20, 2)
for K in (10, 100, 1000):
    u_k = model.gen_unique_randomized(1, u_star, 0.3, K, 2)
    print(f"randomized K={K:5d} measured theta {metrics.misalignment(u_k):.4f}")

# %% Two-group scheme: alternate sqrt(1-theta) Z2 +/- sqrt(theta) Z3, theta exact
for theta in (0.05, 0.3, 0.5):
    u_k = model.gen_unique_two_group(1, u_star, theta, 4, 2)
    cross = u_k[0].T @ u_k[1]
    print(f"two-group theta={theta}: measured {metrics.misalignment(u_k):.12f}, "
          f"U+^T U- diag {np.round(np.diag(cross), 12)}")

# %% Identifiability: theta = 0 collapses the unique subspaces onto one direction
truth = model.generate(model.JiveConfig(n=20, d=20, K=4, r=2, r_k=2, theta=0.3)).truth
aligned = model.assemble(truth.u_star, np.repeat(truth.u_k[:1], 4, axis=0), truth.v_k, truth.w_k)
print("\n".join(metrics.identifiability_check(aligned).lines()))
