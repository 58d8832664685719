"""
Truncating to {1, ..., N}
=========================

{1..N} is not a Folner set for multiplication.  When phi depends on the first
k primes only, T_N(phi) splits into blocks indexed by the integers m coprime
to those primes; each block is an additive Toeplitz matrix over the smooth
numbers up to N // m, so only a handful of distinct blocks are ever needed.
"""

from szego_lab import Symbol, partition_classes
from szego_lab.decompose import decompose_bench, doubling_gaps, quotient_multiplicities

dec = partition_classes(10, 1)
for c in dec.classes:
    print(f"F_{c.m} = {c.members}")
print("distinct quotients N // m:", quotient_multiplicities(10, 1))

phi = Symbol.cosine(2.0, 1.0)
print()
for N in (256, 1024, 2048):
    out = decompose_bench(phi, N, 1)
    print(f"N = {N:5d}  dense {out['direct_seconds']:.3f}s  blocks {out['block_seconds']:.4f}s  "
          f"max deviation {out['max_deviation']:.1e}")

# det(T_N)^(1/N) converges; successive doublings move it less and less
print()
for row in doubling_gaps(phi, [64, 128, 256, 512, 1024], k=1):
    print(f"N = {row['N']:5d}   value = {row['value']:.14f}   |value(2N) - value(N)| = {row['gap']:.2e}")
