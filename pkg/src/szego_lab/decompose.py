"""Block structure of multiplicative truncations over ``{1, ..., N}``.

When a symbol only depends on the first ``k`` torus variables, the ratio
``j / i`` of two indices lying in different classes ``m * (p_1..p_k-smooth)``
(``m`` coprime to ``p_1 ... p_k``) always involves a larger prime, so the
matrix splits into blocks, one per class.  The class of ``m`` is a scaled copy
of the smooth numbers up to ``N // m``, and its block is the additive Toeplitz
matrix of the symbol over the exponent tuples of those smooth numbers.  Only
``O(sqrt(N))`` distinct quotients ``N // m`` occur, so each distinct block is
diagonalised once and reused with multiplicity.
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .indexing import (IndexSet, PrimeTable, coprime_density, coprime_residuals,
                       smooth_numbers, smooth_set)
from .spectral import SpectralSummary, eigenvalues, logdet
from .symbol import Symbol, _resolve, certify_positive, grid_range
from .toeplitz import assemble_additive, assemble_multiplicative

__all__ = [
    "BlockClass",
    "BlockDecomposition",
    "LimitMeasure",
    "partition_classes",
    "quotient_multiplicities",
    "smooth_count",
    "block_spectrum",
    "block_logdet",
    "non_folner_detroot",
    "doubling_gaps",
    "mass_series",
    "log2_series",
    "smooth_tail_bound",
    "limit_measure_moment",
    "limit_measure_atoms",
    "cesaro_average",
    "cesaro_limit",
    "decompose_bench",
]


@dataclass(frozen=True)
class BlockClass:
    m: int
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class BlockDecomposition:
    N: int
    k: int
    classes: tuple[BlockClass, ...]
    distinct_quotients: dict

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "k": self.k,
            "classes": [{"m": c.m, "members": list(c.members), "size": c.size}
                        for c in self.classes],
            "distinct_quotients": {str(q): n for q, n in sorted(self.distinct_quotients.items())},
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _first_primes(k: int, table: PrimeTable | None) -> list[int]:
    table = table or PrimeTable.default()
    return [table.prime(i) for i in range(k)]


def partition_classes(N: int, k: int, table: PrimeTable | None = None) -> BlockDecomposition:
    """Split ``{1..N}`` into the classes ``F_m = m * {p_1..p_k-smooth} & [1, N]``."""
    if N < 1 or k < 1:
        raise ValueError("need N >= 1 and k >= 1")
    smooth = smooth_numbers(k, N, table)
    classes = []
    quotients: dict[int, int] = {}
    for m in coprime_residuals(k, N, table):
        top = bisect.bisect_right(smooth, N // m)
        classes.append(BlockClass(m, tuple(m * s for s in smooth[:top])))
        q = N // m
        quotients[q] = quotients.get(q, 0) + 1
    return BlockDecomposition(N, k, tuple(classes), quotients)


def _coprime_count(x: int, primes: Sequence[int]) -> int:
    """``#{1 <= m <= x : gcd(m, p_1 ... p_k) = 1}`` by inclusion-exclusion."""
    total = 0
    for r in range(len(primes) + 1):
        for combo in itertools.combinations(primes, r):
            total += (-1) ** r * (x // math.prod(combo))
    return total


def quotient_multiplicities(N: int, k: int, table: PrimeTable | None = None) -> dict[int, int]:
    """``{q: #{m in E_k, m <= N : N // m == q}}`` without enumerating every ``m``."""
    primes = _first_primes(k, table)
    out = {}
    m = 1
    while m <= N:
        q = N // m
        hi = N // q
        count = _coprime_count(hi, primes) - _coprime_count(m - 1, primes)
        if count:
            out[q] = count
        m = hi + 1
    return out


def smooth_count(k: int, n: int, table: PrimeTable | None = None) -> int:
    """``|Y_n|``: number of ``p_1..p_k``-smooth integers ``<= n`` (exact, integer arithmetic)."""
    primes = _first_primes(k, table)

    def count(pos, bound):
        if bound < 1:
            return 0
        if pos < 0:
            return 1
        p = primes[pos]
        total = 0
        while bound >= 1:
            total += count(pos - 1, bound)
            bound //= p
        return total

    return count(k - 1, n)


class _BlockCache:
    """Additive Toeplitz blocks over ``Y_q`` keyed by ``q`` (only changes at smooth ``q``)."""

    def __init__(self, s: Symbol, k: int, table: PrimeTable | None):
        if s.variable_count > k:
            raise ValueError(
                f"symbol depends on {s.variable_count} variables; the {k}-variable "
                "block decomposition does not apply"
            )
        self.s, self.k, self.table = s, k, table
        self._smooth = [1]
        self._eig: dict[int, np.ndarray] = {}
        self._logdet: dict[int, float] = {}

    def _key(self, q: int) -> int:
        # Y_q == Y_s for the largest smooth s <= q
        if q > self._smooth[-1]:
            self._smooth = smooth_numbers(self.k, max(q, 2 * self._smooth[-1]), self.table)
        return self._smooth[bisect.bisect_right(self._smooth, q) - 1]

    def matrix(self, q: int) -> np.ndarray:
        return assemble_additive(self.s, smooth_set(self.k, q, self.table), max_size=10**9)

    def eig(self, q: int) -> np.ndarray:
        key = self._key(q)
        if key not in self._eig:
            self._eig[key] = eigenvalues(self.matrix(key), check=False).eigenvalues
        return self._eig[key]

    def logdet(self, q: int) -> float:
        key = self._key(q)
        if key not in self._logdet:
            self._logdet[key] = logdet(self.matrix(key))
        return self._logdet[key]


def block_spectrum(s: Symbol, N: int, k: int | None = None,
                   table: PrimeTable | None = None) -> SpectralSummary:
    """Spectrum of the ``N x N`` multiplicative truncation assembled from its blocks."""
    k = max(k or s.variable_count, 1)
    cache = _BlockCache(s, k, table)
    parts = []
    for q, mult in sorted(quotient_multiplicities(N, k, table).items()):
        parts.append(np.tile(cache.eig(q), mult))
    lam = np.sort(np.concatenate(parts)) if parts else np.zeros(0)
    if lam.size and lam[0] > 0:
        return SpectralSummary(lam, float(np.sum(np.log(lam))))
    return SpectralSummary(lam, None, "nonpositive-eigenvalue")


def block_logdet(s: Symbol, N: int, k: int | None = None, table: PrimeTable | None = None,
                 _cache: _BlockCache | None = None) -> float:
    """``log det`` of the ``N x N`` truncation as a multiplicity-weighted sum of block Cholesky logdets."""
    k = max(k or s.variable_count, 1)
    cache = _cache or _BlockCache(s, k, table)
    return float(sum(mult * cache.logdet(q)
                     for q, mult in sorted(quotient_multiplicities(N, k, table).items())))


def non_folner_detroot(s: Symbol, N: int, k: int | None = None,
                       table: PrimeTable | None = None) -> float:
    """``(det T_N phi)^(1/N)`` over ``{1..N}`` via the block decomposition."""
    certify_positive(s)
    return math.exp(block_logdet(s, N, k, table) / N)


def _mp_logdet(m: np.ndarray, dps: int):
    import mpmath

    with mpmath.workdps(dps):
        chol = mpmath.cholesky(mpmath.matrix(m.tolist()))
        return 2 * mpmath.fsum(mpmath.log(mpmath.re(chol[i, i])) for i in range(m.shape[0]))


def doubling_gaps(s: Symbol, sizes: Sequence[int], k: int | None = None,
                  table: PrimeTable | None = None, dps: int | None = 40) -> list[dict]:
    """Values at ``N`` and ``2N`` of ``(det T_N phi)^(1/N)`` and the gap between them.

    The gap is formed from the exact rational weight difference
    ``mult_2N(q)/(2N) - mult_N(q)/N`` per block, so the large common part
    cancels before rounding.  With ``dps`` set, block log-determinants are
    evaluated in ``dps``-digit arithmetic (the gaps shrink geometrically and
    reach double-precision noise quickly); ``dps=None`` stays in floats.
    """
    certify_positive(s)
    k = max(k or s.variable_count, 1)
    cache = _BlockCache(s, k, table)
    mp_logdets: dict[int, object] = {}

    def ell(q):
        if dps is None:
            return cache.logdet(q)
        key = cache._key(q)
        if key not in mp_logdets:
            mp_logdets[key] = _mp_logdet(cache.matrix(key), dps)
        return mp_logdets[key]

    def weights(N):
        w: dict[int, Fraction] = {}
        for q, mult in quotient_multiplicities(N, k, table).items():
            key = cache._key(q)
            w[key] = w.get(key, Fraction(0)) + Fraction(mult, N)
        return w

    def combine(w):
        if dps is None:
            return math.fsum(float(c) * ell(q) for q, c in w.items())
        import mpmath

        with mpmath.workdps(dps):
            return mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * ell(q)
                               for q, c in w.items())

    out = []
    for N in sizes:
        w1, w2 = weights(N), weights(2 * N)
        delta = {q: w2.get(q, Fraction(0)) - w1.get(q, Fraction(0)) for q in set(w1) | set(w2)}
        log_v1, log_diff = combine(w1), combine(delta)
        if dps is None:
            v1 = math.exp(log_v1)
            gap = v1 * abs(math.expm1(log_diff))
            v2 = v1 * math.exp(log_diff)
        else:
            import mpmath

            with mpmath.workdps(dps):
                v1m = mpmath.exp(log_v1)
                gap = float(v1m * abs(mpmath.expm1(log_diff)))
                v1, v2 = float(v1m), float(v1m * mpmath.exp(log_diff))
        out.append({"N": N, "value": v1, "value_2N": v2, "gap": gap})
    return out


def _series_over_smooth(k: int, cutoff: int, weight: Callable[[int], float],
                        table: PrimeTable | None) -> float:
    """``sum_{n <= cutoff} a_n / (n (n+1))`` where ``a_n = weight(s)`` for the largest smooth ``s <= n``.

    Between consecutive smooth numbers ``a_n`` is constant, and the weights
    ``1/(n(n+1))`` telescope to ``1/s_i - 1/s_{i+1}``.
    """
    smooth = smooth_numbers(k, cutoff, table)
    ends = smooth[1:] + [cutoff + 1]
    total = 0.0
    for start, stop in zip(smooth, ends):
        total += weight(start) * (1.0 / start - 1.0 / stop)
    return total


def mass_series(k: int, cutoff: int, table: PrimeTable | None = None) -> float:
    """Partial sum ``sum_{n <= cutoff} |Y_n| / (n (n+1))``."""
    smooth = smooth_numbers(k, cutoff, table)
    rank = {v: i + 1 for i, v in enumerate(smooth)}
    return _series_over_smooth(k, cutoff, rank.__getitem__, table)


def log2_series(cutoff: int) -> float:
    """``sum_{n <= cutoff} floor(log2 n) / (n (n+1))`` term by term."""
    n = np.arange(1, cutoff + 1, dtype=np.float64)
    floor_log2 = np.frexp(n)[1] - 1
    return float(np.sum(floor_log2 / (n * (n + 1.0))))


def _smooth_upper(k: int, n: int, table: PrimeTable | None, exact_below: int = 10**15) -> float:
    """Upper bound on ``|Y_n|``: exact count, or the shifted simplex volume for huge ``n``."""
    if n <= exact_below:
        return float(smooth_count(k, n, table))
    logs = [math.log(p) for p in _first_primes(k, table)]
    t = math.log(n)
    # each lattice point's unit cube lies in the simplex enlarged by sum(logs)
    return (t + sum(logs)) ** k / (math.factorial(k) * math.prod(logs))


def smooth_tail_bound(k: int, cutoff: int, table: PrimeTable | None = None) -> float:
    """Rigorous upper bound on ``sum_{n > cutoff} |Y_n| / (n (n+1))``.

    Dyadic blocks ``(a, 2a]`` contribute at most ``|Y_{2a}| (1/(a+1) - 1/(2a+1))``.
    """
    a = cutoff
    total = 0.0
    prev = None
    for _ in range(4000):
        b = 2 * a
        term = _smooth_upper(k, b, table) * (1.0 / (a + 1) - 1.0 / (b + 1))
        total += term
        if prev is not None and term < 1e-18 * max(total, 1e-300):
            ratio = term / prev
            if ratio < 0.75:
                # geometric remainder
                return total + term * ratio / (1.0 - ratio)
        prev = term
        a = b
    raise ArithmeticError("tail bound did not converge")


@dataclass
class LimitMeasure:
    """Truncated series for the limiting spectral functional over ``{1..N}``."""

    k: int
    cutoff: int
    prefactor: float
    value: float
    tail_bound: float
    terms: list[tuple[int, float]] = field(default_factory=list)


def _sup_norm(f, s: Symbol) -> float:
    low, high = grid_range(s)
    fn, _ = _resolve(f)
    xs = np.linspace(low, high, 4097)
    return float(np.max(np.abs(fn(xs))))


def limit_measure_moment(s: Symbol, f, k: int | None = None, cutoff: int = 10**4,
                         table: PrimeTable | None = None) -> LimitMeasure:
    """``prod(1 - 1/p_j) * sum_{n <= cutoff} Tr f(T_{Y_n} phi) / (n (n+1))`` with a rigorous tail bound.

    The tail is bounded by ``prefactor * ||f||_inf * sum_{n > cutoff} |Y_n| / (n (n+1))``
    where the sup norm is taken over the sampled range of ``phi``.
    """
    k = max(k or s.variable_count, 1)
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    fn, needs = _resolve(f)
    cache = _BlockCache(s, k, table)
    terms = []

    def weight(q):
        lam = cache.eig(q)
        if needs is not None and lam[0] <= 0:
            raise DomainError(f"{needs} undefined at eigenvalue {lam[0]:.6g}")
        a = float(np.sum(fn(lam)))
        terms.append((q, a))
        return a

    prefactor = coprime_density(k, table)
    series = _series_over_smooth(k, cutoff, weight, table)
    tail = prefactor * _sup_norm(f, s) * smooth_tail_bound(k, cutoff, table)
    return LimitMeasure(k, cutoff, prefactor, prefactor * series, tail, terms)


def limit_measure_atoms(s: Symbol, k: int | None = None, cutoff: int = 10**4,
                        table: PrimeTable | None = None, decimals: int = 10
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Atoms and weights of the limiting spectral measure, truncated at ``cutoff``.

    Eigenvalues are merged after rounding to ``decimals``.  The weights sum to
    one minus the truncated tail mass.
    """
    k = max(k or s.variable_count, 1)
    cache = _BlockCache(s, k, table)
    prefactor = coprime_density(k, table)
    smooth = smooth_numbers(k, cutoff, table)
    ends = smooth[1:] + [cutoff + 1]
    acc: dict[float, float] = {}
    for start, stop in zip(smooth, ends):
        w = prefactor * (1.0 / start - 1.0 / stop)
        for lam in cache.eig(start):
            key = round(float(lam), decimals)
            acc[key] = acc.get(key, 0.0) + w
    atoms = np.array(sorted(acc))
    return atoms, np.array([acc[a] for a in atoms])


def _sequence(a):
    if callable(a):
        return a
    seq = list(a)
    if seq and seq[0] != 0:
        raise ValueError("the sequence must start with a_0 = 0")
    return seq.__getitem__


def cesaro_average(a, k: int, N: int, table: PrimeTable | None = None) -> float:
    """``(1/N) sum_{m in E_k, m <= N} a_{N // m}``; ``a`` is a sequence (``a[0] == 0``) or callable."""
    get = _sequence(a)
    primes = _first_primes(k, table)
    total = 0.0
    m = 1
    while m <= N:
        q = N // m
        hi = N // q
        count = _coprime_count(hi, primes) - _coprime_count(m - 1, primes)
        if count:
            total += count * get(q)
        m = hi + 1
    return total / N


def cesaro_limit(a, k: int, cutoff: int, table: PrimeTable | None = None) -> float:
    """``prod(1 - 1/p_j) * int_0^1 a_{floor(1/x)} dx`` with the step integral summed exactly up to ``cutoff``."""
    get = _sequence(a)
    total = math.fsum(get(n) * (1.0 / n - 1.0 / (n + 1)) for n in range(1, cutoff + 1))
    return coprime_density(k, table) * total


def decompose_bench(s: Symbol, N: int, k: int | None = None,
                    table: PrimeTable | None = None, max_size: int | None = None) -> dict:
    """Time the dense and block routes to the ``N x N`` spectrum and compare them."""
    k = max(k or s.variable_count, 1)
    t0 = time.perf_counter()
    dense = eigenvalues(assemble_multiplicative(s, IndexSet.natural(N), table,
                                                max_size=max_size)).eigenvalues
    t1 = time.perf_counter()
    blocks = block_spectrum(s, N, k, table).eigenvalues
    t2 = time.perf_counter()
    return {
        "N": N,
        "k": k,
        "direct_seconds": t1 - t0,
        "block_seconds": t2 - t1,
        "speedup": (t1 - t0) / max(t2 - t1, 1e-12),
        "max_deviation": float(np.max(np.abs(dense - blocks))) if N else 0.0,
    }
