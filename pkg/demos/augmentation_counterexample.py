#!/usr/bin/env python3
"""A super-regular pair plus one vertex per side that breaks the augmentation bound.

The original 5x10 pair is (1/4, 1/2)-super-regular.  Adding one row and one
column of degree ratio >= 1/2 gives eps0 = 1/4 + 1/5 and
delta0 = (1/2) / (6/5)^2 = 25/72, but a 3x5 window has density 1/3.
"""
from fractions import Fraction
from itertools import combinations
from math import ceil

import numpy as np

from tilekit.regkit import BipartitePair, augment_super_regular_check, density, is_super_regular

M = np.array([
    [0, 0, 1, 0, 1, 0, 1, 1, 0, 1, 1],
    [1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 0],
    [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1],
    [0, 0, 1, 0, 1, 0, 1, 1, 0, 1, 1],
])

if __name__ == "__main__":
    after = BipartitePair.from_matrix(M)
    before = after.sub(range(5), range(10))
    eps1, d1, eps2, d2 = Fraction(1, 4), Fraction(1, 2), Fraction(1, 5), Fraction(1, 2)
    eps0, d0 = eps1 + eps2, min(d1, d2) / (1 + eps2) ** 2
    print("before is (1/4, 1/2)-super-regular:", is_super_regular(before, eps1, d1))
    print(f"claimed parameters for the augmented pair: eps0={eps0}, delta0={d0}")
    print("augmented pair passes:", augment_super_regular_check(before, after, eps1, d1, eps2, d2))
    a, b = after.shape
    worst = min(
        (density(after.sub(X, Y)), X, Y)
        for x in range(ceil(eps0 * a), a + 1) for X in combinations(range(a), x)
        for y in range(ceil(eps0 * b), b + 1) for Y in combinations(range(b), y)
    )
    print(f"sparsest qualifying window: rows {worst[1]}, cols {worst[2]}, density {worst[0]}")
    print("the new row 5 copies the sparse row 0, so mixing it in dilutes the window below delta0")
