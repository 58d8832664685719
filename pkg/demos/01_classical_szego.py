"""
Determinants of growing Toeplitz matrices
=========================================

For a positive symbol phi on the circle, the n-th root of det T_n(phi)
tends to exp(int log phi).  Here phi = 2 + cos(theta), whose limit is
(2 + sqrt 3) / 2.
"""

import math

from szego_lab import Symbol, folner_box
from szego_lab.spectral import folner_limit_experiment

phi = Symbol.cosine(2.0, 1.0)

# boxes {0, ..., L-1} form a Folner sequence in Z
report = folner_limit_experiment(phi, [folner_box(1, L) for L in (4, 16, 64, 256, 1024)])

print("limit exp(int log phi) =", report.reference)
print("closed form            =", (2 + math.sqrt(3)) / 2)
for (L, value), gap in zip(report.rows, report.gaps):
    # the gap shrinks like 1/L: the boundary contributes a fixed amount to log det
    print(f"L = {L:5d}   det^(1/L) = {value:.10f}   gap = {gap:.2e}   L*gap = {L * gap:.4f}")

# the same experiment on a 2-variable symbol over square boxes
psi = Symbol.cosine(3.0, 1.0) + Symbol.cosine(0.0, 1.0, variable=1)
rep2 = folner_limit_experiment(psi, [folner_box(2, L) for L in (4, 8, 16, 32)])
print()
print("two variables, limit =", rep2.reference)
for (n, value), gap in zip(rep2.rows, rep2.gaps):
    print(f"|box| = {n:5d}   det^(1/n) = {value:.8f}   gap = {gap:.2e}")
