"""Monte Carlo check of Gaussian moment identities.

For E with i.i.d. N(0, sigma^2) entries, products like E A E^T B E C E^T have
closed-form expectations. Each check averages the product over many draws
and compares it with the formula inside a 5 standard-error band.

Run: python demos/04_moment_identities.py   (about 10 s)
"""

# %% Degree 2
import numpy as np

from jivelab import momentlab

a = np.array([[1.0, 2.0], [3.0, 4.0]])
print("E[E A E] for sigma=0.5:\n", momentlab.closed_form_deg2("EAE", a, 0.5))

# %% All identities on random operands
for identity in momentlab.DEG2 + momentlab.DEG4 + ("ODD3",):
    n1, n2 = (3, 4) if identity in momentlab.DEG2 else (3, 3)
    ops = momentlab.random_operands(identity, n1, n2, seed=1)
    rep = momentlab.mc_verify(identity, *ops, n1=n1, n2=n2, samples=400_000, seed=2)
    ratio = rep.max_abs_dev / rep.max_std_err if rep.max_std_err else 0.0
    print(f"{identity:6s} max deviation {ratio:4.2f} SE  {'ok' if rep.passed else 'FAIL'}")
