"""
Multiplicative Toeplitz matrices
================================

A positive rational is labelled by its vector of prime exponents, so a symbol
on the infinite torus gives a matrix on positive integers whose (i, j) entry
depends on j / i only.
"""

import numpy as np

from szego_lab import IndexSet, Symbol, assemble_multiplicative, factorize, szego_bounds_check
from szego_lab.indexing import PrimeTable, ratio_index

table = PrimeTable.default()
print("label(12)   =", factorize(12, table))
print("label(3/2)  =", ratio_index(3, 2, table))
print("label(97)   has its 1 at position", len(factorize(97, table)), "(97 is the 25th prime)")

# phi = 2 + cos(theta_1): only ratios 1, 2 and 1/2 see a coefficient
phi = Symbol.cosine(2.0, 1.0)
print()
print(assemble_multiplicative(phi, IndexSet.natural(8)))

# a symbol in theta_1 and theta_2 couples 2 and 3
psi = phi + Symbol.cosine(0.0, 0.8, variable=1)
m = assemble_multiplicative(psi, IndexSet.natural(12))
print()
print("nonzero pattern for 2 + cos t1 + 0.8 cos t2 on {1..12}:")
for row in (m != 0).astype(int):
    print("".join(".#"[v] for v in row))

# exp(int log phi) <= det^(1/|sigma|) <= ||phi||_1 for every finite set
rng = np.random.default_rng(0)
print()
for _ in range(5):
    sigma = IndexSet.multiplicative(rng.choice(np.arange(1, 200), size=15, replace=False))
    b = szego_bounds_check(psi, sigma, table)
    print(f"{b.lower:.6f} <= {b.middle:.6f} <= {b.upper:.6f}   ok={b.passed}")
