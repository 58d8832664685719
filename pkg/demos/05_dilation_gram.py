"""
Gram matrices of dilations
==========================

For h = sum c_n e_n the dilates T_m h = sum c_n e_{mn} have Gram matrix equal
to the multiplicative Toeplitz matrix of |Uh|^2, where Uh = sum c_n z^label(n).
The same algebra covers f(x) -> f(mx) on L^2(0, 1) with the sine basis and
f(w) -> f(w^m) on the Hardy space.
"""

import numpy as np

from szego_lab import DilationVector, IndexSet, assemble_multiplicative, gram_matrix, lift_symbol
from szego_lab.gram import gram_bounds_check, quadrature_gram

h = DilationVector("sine", {1: 1.0, 2: 0.5, 3: -0.25j})
sigma = IndexSet.natural(6)

direct = gram_matrix(h, sigma)
fourier = assemble_multiplicative(lift_symbol(h), sigma)
numeric = quadrature_gram(h, sigma)
print("max |coefficient route - Toeplitz route| =", np.max(np.abs(direct - fourier)))
print("max |coefficient route - quadrature|     =", np.max(np.abs(direct - numeric)))

for N in (4, 32, 256):
    b, converged = gram_bounds_check(h, IndexSet.natural(N))
    print(f"N = {N:4d}: {b.lower:.6f} <= det^(1/N) = {b.middle:.6f} <= ||h||^2 = {b.upper:.6f}")
