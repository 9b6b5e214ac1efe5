"""Seed derivation.

Every random draw in the package comes from a numpy ``PCG64`` generator whose
seed is a splitmix64 hash of a tuple of integers (a master seed plus stream
tags / indices). Two draws that share a tuple are bit-identical; draws with
different tuples are independent streams, regardless of the order in which
they are requested.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# stream tags
U_STAR = 1
UNIQUE = 2
LOADINGS = 3
NOISE = 4
MOMENTS = 5


def splitmix64(x: int) -> int:
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed with splitmix64."""
    h = 0
    for p in parts:
        h = splitmix64(h ^ (int(p) & MASK64))
    return h


def make_rng(*parts: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(mix_seed(*parts)))
