"""
Clamped symbols and counting smooth numbers
===========================================

Clamping phi to min(phi, n) lowers every eigenvalue of a truncation, and the
determinants climb back to those of phi as n grows.  Separately, the number
of k-smooth integers up to N is a lattice-point count in a simplex.
"""

import math

from szego_lab import Symbol, folner_box, lattice_count, smooth_set
from szego_lab.spectral import clamp_limit_experiment

phi = Symbol.cosine(2.0, 1.0)
rep = clamp_limit_experiment(phi, [1.5, 2.0, 2.5, 2.9, 3.0], folner_box(1, 256))
print("unclamped det^(1/256) =", rep.reference)
for (level, value), check in zip(rep.rows, rep.extra["checks"]):
    print(f"clamp at {level:.1f}: det^(1/256) = {value:.6f}   "
          f"eigenvalues below phi's: {check['eigenvalues_dominated']}   ||phi - phi_n||_1 = {check['l1_gap']:.4f}")

# |Y_N| (log N)^-k k! prod log p approaches 1, slowly for larger k
print()
for k in (1, 2, 3):
    logs = [math.log(p) for p in (2, 3, 5)[:k]]
    for e in (6, 12, 24):
        N = 10**e
        count = len(smooth_set(k, N)) if e == 6 else lattice_count(logs, math.log(N)).count
        ratio = count * math.factorial(k) * math.prod(logs) / math.log(N) ** k
        print(f"k = {k}, N = 1e{e:<2d}: count = {count:>8d}   ratio = {ratio:.4f}")
