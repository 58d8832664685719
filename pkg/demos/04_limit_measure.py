"""
The limiting spectral measure over {1, ..., N}
==============================================

Normalised traces (1/N) Tr f(T_N) converge to a weighted series over the
smooth numbers, sum |Y_n| / (n (n+1)) times the spectral average of the
block on Y_n, with prefactor prod(1 - 1/p).  With f = 1 the series
produces number-theoretic identities.
"""

import numpy as np

from szego_lab import IndexSet, Symbol, assemble_multiplicative, trace_f
from szego_lab.decompose import (limit_measure_atoms, limit_measure_moment, log2_series,
                                 mass_series, smooth_tail_bound)

for cutoff in (10**2, 10**4, 10**6):
    print(f"cutoff {cutoff:>8d}: sum [log2 n]/(n(n+1)) = {log2_series(cutoff):.8f}   "
          f"two-prime series = {mass_series(2, cutoff):.6f}   "
          f"tail bound (k=2) = {smooth_tail_bound(2, cutoff):.1e}")

phi = Symbol.cosine(2.0, 1.0)
lm = limit_measure_moment(phi, "square", k=1, cutoff=10**5)
direct = trace_f(assemble_multiplicative(phi, IndexSet.natural(2048)), "square")
print()
print(f"series value of the second moment: {lm.value:.6f} (+/- {lm.tail_bound:.1e})")
print(f"(1/N) Tr T_N^2 at N = 2048:       {direct:.6f}")

# the limit measure is atomic; its heaviest atoms
atoms, weights = limit_measure_atoms(phi, k=1, cutoff=4096)
order = np.argsort(weights)[::-1][:6]
print()
for a, w in zip(atoms[order], weights[order]):
    print(f"atom {a:.6f}  weight {w:.5f}")
