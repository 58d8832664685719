"""Prime tables, prime-exponent labels and the index sets used as truncations.

Positive rationals are identified with finitely supported integer vectors
through their prime factorisation: ``q = 2**a1 * 3**a2 * 5**a3 * ...`` maps to
``(a1, a2, a3, ...)``.  Multiplication of rationals becomes addition of
vectors, which is what turns a Toeplitz matrix on the infinite torus into a
matrix whose ``(i, j)`` entry only depends on ``j / i``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_LATTICE_CAP, DEFAULT_PRIME_LIMIT, max_dim
from .errors import CapacityError

__all__ = [
    "MultiIndex",
    "PrimeTable",
    "IndexSet",
    "LatticeCount",
    "factorize",
    "ratio_index",
    "rational_of",
    "coprime_residuals",
    "coprime_density",
    "smooth_numbers",
    "smooth_set",
    "lattice_count",
    "folner_box",
    "multiplicative_folner",
    "overlap_ratio",
]


class MultiIndex(tuple):
    """Finitely supported integer vector with trailing zeros stripped.

    Arithmetic is componentwise (``+``, ``-``, unary ``-``), so unlike a plain
    tuple ``a + b`` does not concatenate.  Because the stored form is
    canonical, a ``MultiIndex`` hashes and compares equal to the plain tuple
    of its stored entries and can be used directly as a dictionary key.
    """

    __slots__ = ()

    def __new__(cls, exponents: Iterable[int] = ()):
        entries = [int(e) for e in exponents]
        while entries and entries[-1] == 0:
            entries.pop()
        return super().__new__(cls, entries)

    def dimension(self) -> int:
        return len(self)

    def padded(self, length: int) -> tuple[int, ...]:
        if length < len(self):
            raise ValueError(f"cannot pad {self!r} of dimension {len(self)} to {length}")
        return tuple(self) + (0,) * (length - len(self))

    def __add__(self, other):
        other = tuple(other)
        n = max(len(self), len(other))
        a, b = self.padded(n), MultiIndex(other).padded(n)
        return MultiIndex(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return MultiIndex(-x for x in self)

    def __sub__(self, other):
        return self + (-MultiIndex(other))

    def __rsub__(self, other):
        return MultiIndex(other) - self

    def __repr__(self):
        return f"MultiIndex({tuple(self)!r})"


class PrimeTable:
    """Smallest-prime-factor table for ``2 <= n <= limit``.

    Parameters
    ----------
    limit : int
        Largest integer that can be factorised.

    Notes
    -----
    The table is immutable after construction and may be shared freely.
    """

    def __init__(self, limit: int = DEFAULT_PRIME_LIMIT):
        limit = int(limit)
        if limit < 2:
            raise ValueError("prime table limit must be at least 2")
        spf = np.zeros(limit + 1, dtype=np.int64)
        for p in range(2, math.isqrt(limit) + 1):
            if spf[p] == 0:
                block = spf[p * p :: p]
                block[block == 0] = p
        untouched = np.flatnonzero(spf == 0)
        spf[untouched] = untouched
        spf[:2] = 0
        spf.setflags(write=False)
        primes = np.flatnonzero(spf == np.arange(limit + 1))
        primes = primes[primes >= 2]
        primes.setflags(write=False)
        self.limit = limit
        self.smallest_prime_factor = spf
        self.primes = primes
        self._position = {int(p): i for i, p in enumerate(primes[:4096])}

    @classmethod
    @functools.lru_cache(maxsize=None)
    def default(cls) -> "PrimeTable":
        """Shared table with the default limit."""
        return cls(DEFAULT_PRIME_LIMIT)

    def __repr__(self):
        return f"PrimeTable(limit={self.limit}, primes={len(self.primes)})"

    def prime_index(self, p: int) -> int:
        """Zero-based position of the prime ``p`` in the ascending prime list."""
        pos = self._position.get(p)
        if pos is None:
            pos = int(np.searchsorted(self.primes, p))
            if pos >= len(self.primes) or self.primes[pos] != p:
                raise ValueError(f"{p} is not a prime in the table")
        return pos

    def prime(self, i: int) -> int:
        """The ``i``-th prime, zero-based (``prime(0) == 2``)."""
        if i >= len(self.primes):
            raise CapacityError(
                f"prime number {i + 1} is beyond the table limit {self.limit}",
                required=None,
            )
        return int(self.primes[i])

    def check(self, n: int) -> None:
        if n > self.limit:
            raise CapacityError(
                f"{n} exceeds prime table limit {self.limit}; need limit >= {n}",
                required=int(n),
            )


def factorize(n: int, table: PrimeTable) -> MultiIndex:
    """Prime-exponent vector of a positive integer.

    >>> factorize(12, PrimeTable(100))
    MultiIndex((2, 1))
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"factorize expects a positive integer, got {n}")
    table.check(n)
    exps: dict[int, int] = {}
    spf = table.smallest_prime_factor
    while n > 1:
        p = int(spf[n])
        i = table.prime_index(p)
        exps[i] = exps.get(i, 0) + 1
        n //= p
    if not exps:
        return MultiIndex()
    vec = [0] * (max(exps) + 1)
    for i, e in exps.items():
        vec[i] = e
    return MultiIndex(vec)


def ratio_index(j: int, i: int, table: PrimeTable) -> MultiIndex:
    """Label of the rational ``j / i``."""
    return factorize(j, table) - factorize(i, table)


def rational_of(kappa: Sequence[int], table: PrimeTable) -> Fraction:
    """Inverse of the labelling: the positive rational with exponent vector ``kappa``."""
    num = den = 1
    for pos, e in enumerate(kappa):
        if e == 0:
            continue
        p = table.prime(pos)
        if e > 0:
            num *= p**e
        else:
            den *= p ** (-e)
    return Fraction(num, den)


def coprime_residuals(k: int, bound: int, table: PrimeTable | None = None) -> list[int]:
    """Integers in ``[1, bound]`` coprime to each of the first ``k`` primes."""
    if k < 0 or bound < 1:
        raise ValueError("need k >= 0 and bound >= 1")
    table = table or PrimeTable.default()
    keep = np.ones(bound + 1, dtype=bool)
    keep[0] = False
    for pos in range(k):
        keep[:: table.prime(pos)] = False
    return np.flatnonzero(keep).tolist()


def coprime_density(k: int, table: PrimeTable | None = None) -> float:
    """``prod(1 - 1/p)`` over the first ``k`` primes."""
    table = table or PrimeTable.default()
    return math.prod(1.0 - 1.0 / table.prime(pos) for pos in range(k))


def _smooth_exponents(primes: Sequence[int], N: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def walk(pos, value, prefix):
        if pos == len(primes):
            out.append(prefix)
            return
        p = primes[pos]
        e = 0
        while value <= N:
            walk(pos + 1, value, prefix + (e,))
            value *= p
            e += 1

    walk(0, 1, ())
    return out


def smooth_numbers(k: int, N: int, table: PrimeTable | None = None) -> list[int]:
    """Ascending list of integers ``<= N`` whose prime factors are among the first ``k`` primes."""
    table = table or PrimeTable.default()
    primes = [table.prime(pos) for pos in range(k)]
    values = [math.prod(p**e for p, e in zip(primes, ex)) for ex in _smooth_exponents(primes, N)]
    return sorted(values)


@dataclass(frozen=True)
class IndexSet:
    """Ordered finite set of labels defining a truncation.

    ``mode`` is ``"additive"`` (labels are equal-length integer tuples, points
    of ``Z^d``) or ``"multiplicative"`` (labels are positive integers).
    Labels are kept in lexicographic / ascending order and must be distinct.
    """

    mode: str
    labels: tuple

    def __post_init__(self):
        if self.mode not in ("additive", "multiplicative"):
            raise ValueError(f"unknown index set mode {self.mode!r}")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("index set labels must be distinct")
        if self.mode == "additive":
            dims = {len(x) for x in self.labels}
            if len(dims) > 1:
                raise ValueError("additive labels must share one dimension")
        elif any(int(x) < 1 for x in self.labels):
            raise ValueError("multiplicative labels must be positive integers")

    @classmethod
    def additive(cls, labels: Iterable[Sequence[int]]) -> "IndexSet":
        return cls("additive", tuple(sorted(tuple(int(v) for v in x) for x in labels)))

    @classmethod
    def multiplicative(cls, labels: Iterable[int]) -> "IndexSet":
        return cls("multiplicative", tuple(sorted(int(x) for x in labels)))

    @classmethod
    def natural(cls, N: int) -> "IndexSet":
        """The initial segment ``{1, ..., N}``."""
        return cls("multiplicative", tuple(range(1, N + 1)))

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    @property
    def dimension(self) -> int:
        if self.mode != "additive" or not self.labels:
            return 0
        return len(self.labels[0])

    @functools.cached_property
    def position(self) -> dict:
        return {x: i for i, x in enumerate(self.labels)}


@dataclass(frozen=True)
class LatticeCount:
    weights: tuple[float, ...]
    bound: float
    count: int
    main_term: float = field(init=False)

    def __post_init__(self):
        m = len(self.weights)
        main = self.bound**m / (math.factorial(m) * math.prod(self.weights))
        object.__setattr__(self, "main_term", main)

    @staticmethod
    def q_poly(m: int, t: float) -> float:
        """``1 + t + ... + t**(m-1)``."""
        return sum(t**i for i in range(m))

    def error_constant(self) -> float:
        """Smallest ``M`` with ``|count - main_term| <= M * Q_m(t)`` for this instance."""
        return abs(self.count - self.main_term) / self.q_poly(len(self.weights), self.bound)


def lattice_count(x: Sequence[float], t: float, cap: int = DEFAULT_LATTICE_CAP,
                  slack: float = 1e-12) -> LatticeCount:
    """Count ``n`` in ``Z_+^m`` with ``sum(n_j * x_j) <= t`` by enumeration.

    A relative ``slack`` absorbs rounding when a lattice point lies exactly on
    the boundary (e.g. ``x = log 2``, ``t = log 8``).
    """
    x = tuple(float(v) for v in x)
    if not x or any(v <= 0 for v in x) or t <= 0:
        raise ValueError("weights and bound must be positive")
    eps = slack * max(1.0, abs(t))
    total = 0

    def count(m, budget):
        nonlocal total
        if m == 1:
            c = int(math.floor(budget / x[0] + eps / x[0])) + 1
            total += c
            if total > cap:
                raise CapacityError(f"lattice count exceeds cap {cap}", required=None)
            return c
        c = 0
        r = 0
        while r * x[m - 1] <= budget + eps:
            c += count(m - 1, budget - r * x[m - 1])
            r += 1
        return c

    n = count(len(x), float(t))
    return LatticeCount(x, float(t), n)


def smooth_set(k: int, N: int, table: PrimeTable | None = None) -> IndexSet:
    """Exponent tuples ``(n_1..n_k) >= 0`` with ``p_1**n_1 * ... * p_k**n_k <= N``."""
    if k < 1 or N < 1:
        raise ValueError("need k >= 1 and N >= 1")
    table = table or PrimeTable.default()
    primes = [table.prime(pos) for pos in range(k)]
    return IndexSet.additive(_smooth_exponents(primes, N))


def folner_box(d: int, L: int, max_size: int | None = None) -> IndexSet:
    """The cube ``{0, ..., L-1}^d`` in lexicographic order."""
    if d < 1 or L < 1:
        raise ValueError("need d >= 1 and L >= 1")
    cap = max_dim() if max_size is None else max_size
    if L**d > cap:
        raise CapacityError(f"box of size {L}^{d} = {L**d} exceeds dimension cap {cap}",
                            required=L**d)
    return IndexSet("additive", tuple(itertools.product(range(L), repeat=d)))


def multiplicative_folner(k: int, M: int, table: PrimeTable | None = None) -> IndexSet:
    """``{p_1**a_1 * ... * p_k**a_k : 0 <= a_i <= M}`` in ascending order."""
    if k < 1 or M < 0:
        raise ValueError("need k >= 1 and M >= 0")
    table = table or PrimeTable.default()
    primes = [table.prime(pos) for pos in range(k)]
    table.check(math.prod(p**M for p in primes))
    labels = [math.prod(p**a for p, a in zip(primes, ex))
              for ex in itertools.product(range(M + 1), repeat=k)]
    return IndexSet.multiplicative(labels)


def overlap_ratio(sigma: IndexSet, shift) -> float:
    """``|(shift + sigma) & sigma| / |sigma|`` (additive) or ``|(shift * sigma) & sigma| / |sigma|``."""
    if not len(sigma):
        raise ValueError("empty index set")
    members = sigma.position
    if sigma.mode == "additive":
        shift = tuple(shift) + (0,) * (sigma.dimension - len(tuple(shift)))
        hits = sum(tuple(a + b for a, b in zip(x, shift)) in members for x in sigma.labels)
    else:
        q = Fraction(shift)
        hits = 0
        for x in sigma.labels:
            y = q * x
            hits += y.denominator == 1 and int(y) in members
    return hits / len(sigma)
