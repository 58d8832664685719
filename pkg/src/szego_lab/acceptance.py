"""The ten end-to-end acceptance checks.

Each ``criterion_*`` function runs one check at its fixed tolerance and
returns a :class:`CriterionResult`.  Random inputs come from
``numpy.random.default_rng([seed, number])`` so every criterion is
reproducible on its own and independent of execution order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .decompose import (block_spectrum, doubling_gaps, limit_measure_moment, log2_series,
                        mass_series, partition_classes, smooth_count)
from .gram import DilationVector, gram_bounds_check, gram_matrix, lift_symbol
from .indexing import (IndexSet, PrimeTable, folner_box, lattice_count, smooth_numbers,
                       smooth_set)
from .spectral import (INEQUALITY_SLACK, clamped_symbol, eigenvalues, geometric_mean_det,
                       szego_bounds_check, trace_f)
from .symbol import Symbol, integrate, l2_norm_sq, grid_range
from .toeplitz import assemble_additive, assemble_multiplicative, hs_norm_sq

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all", "theorem_matrix"]


@dataclass
class CriterionResult:
    number: int
    name: str
    theorem: str
    passed: bool
    budget_seconds: float
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def within_budget(self) -> bool:
        return self.seconds <= self.budget_seconds

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.number:2d}. {self.name} "
                f"({self.seconds:.1f}s / {self.budget_seconds:.0f}s budget)")

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "theorem": self.theorem,
            "passed": self.passed,
            "seconds": self.seconds,
            "budget_seconds": self.budget_seconds,
            "details": self.details,
        }


def _rng(seed: int, number: int) -> np.random.Generator:
    return np.random.default_rng([seed, number])


def _finite(*values) -> bool:
    return all(math.isfinite(float(v)) for v in values)


def criterion_1(seed: int = 0, scale: float = 1.0) -> dict:
    phi = Symbol.cosine(2.0, 1.0)
    target = (2 + math.sqrt(3)) / 2
    value = geometric_mean_det(assemble_additive(phi, folner_box(1, 512)))
    gap = abs(value - target)
    tol = 5e-3 * scale
    return {"passed": _finite(value) and gap <= tol,
            "geo_mean": value, "target": target, "gap": gap, "tolerance": tol}


def _random_additive_set(rng, k: int) -> IndexSet:
    size = int(rng.integers(1, 41))
    side = 51 if k == 1 else 13
    flat = rng.choice(side**k, size=size, replace=False)
    pts = np.array(np.unravel_index(flat, (side,) * k)).T - side // 2
    return IndexSet.additive(map(tuple, pts.tolist()))


def _random_multiplicative_set(rng) -> IndexSet:
    size = int(rng.integers(1, 41))
    return IndexSet.multiplicative(rng.choice(np.arange(1, 601), size=size, replace=False))


def criterion_2(seed: int = 0, scale: float = 1.0) -> dict:
    rng = _rng(seed, 2)
    table = PrimeTable.default()
    slack = INEQUALITY_SLACK * scale
    checks = violations = 0
    worst = math.inf
    for _ in range(50):
        k = int(rng.integers(1, 3))
        bw = int(rng.integers(1, 4))
        phi = Symbol.random_positive(rng, variables=k, bandwidth=bw)
        log_mean = integrate(phi, "log", tol=1e-13)
        for mode in ("additive", "multiplicative"):
            for _ in range(10):
                sigma = (_random_additive_set(rng, k) if mode == "additive"
                         else _random_multiplicative_set(rng))
                b = szego_bounds_check(phi, sigma, table, slack=slack, log_mean=log_mean)
                checks += 1
                margin = min(b.middle - b.lower, b.upper - b.middle)
                worst = min(worst, margin)
                if not b.passed:
                    violations += 1
    return {"passed": violations == 0 and checks == 1000, "checks": checks,
            "violations": violations, "smallest_margin": worst, "slack": slack}


def criterion_3(seed: int = 0, scale: float = 1.0) -> dict:
    rng = _rng(seed, 3)
    table = PrimeTable.default()
    tol = 1e-9 * scale
    N = 256
    deviations = []
    for trial in range(10):
        k = 1 + trial % 2
        phi = Symbol.random_positive(rng, variables=k, bandwidth=int(rng.integers(1, 4)))
        dense = eigenvalues(assemble_multiplicative(phi, IndexSet.natural(N), table)).eigenvalues
        blocks = block_spectrum(phi, N, k, table).eigenvalues
        deviations.append(float(np.max(np.abs(dense - blocks))))
    partition_ok = True
    for k in (1, 2, 3):
        for n in (1, 2, 3, 10, 97, 1000, 4096, 10_000):
            dec = partition_classes(n, k, table)
            members = [x for c in dec.classes for x in c.members]
            smooth = set(smooth_numbers(k, n, table))
            ok = (sorted(members) == list(range(1, n + 1))
                  and all(x % c.m == 0 and x // c.m in smooth for c in dec.classes for x in c.members)
                  and all(c.size == smooth_count(k, n // c.m, table) for c in dec.classes))
            partition_ok &= ok
    worst = max(deviations)
    return {"passed": _finite(worst) and worst <= tol and partition_ok,
            "max_deviation": worst, "tolerance": tol, "partition_ok": partition_ok}


def criterion_4(seed: int = 0, scale: float = 1.0) -> dict:
    s1 = log2_series(10**6)
    s2 = mass_series(2, 10**6)
    tol1, tol2 = 5e-5 * scale, 2e-4 * scale
    g1, g2 = abs(s1 - 1.0), abs(s2 - 3.0)
    return {"passed": _finite(s1, s2) and g1 <= tol1 and g2 <= tol2,
            "log2_series": s1, "log2_gap": g1, "log2_tolerance": tol1,
            "k2_series": s2, "k2_gap": g2, "k2_tolerance": tol2}


def criterion_5(seed: int = 0, scale: float = 1.0) -> dict:
    phi = Symbol.cosine(2.0, 1.0)
    N = 2048
    direct = trace_f(assemble_multiplicative(phi, IndexSet.natural(N), max_size=N), "square")
    lm = limit_measure_moment(phi, "square", k=1, cutoff=2048)
    gap = abs(direct - lm.value)
    allowed = lm.tail_bound + 1e-2 * scale
    return {"passed": _finite(direct, lm.value) and gap <= allowed,
            "direct": direct, "series": lm.value, "tail_bound": lm.tail_bound,
            "gap": gap, "allowed": allowed}


def criterion_6(seed: int = 0, scale: float = 1.0) -> dict:
    rng = _rng(seed, 6)
    runs = []
    for _ in range(5):
        phi = Symbol.random_positive(rng, variables=1, bandwidth=3, density=1.0)
        gaps = [g["gap"] for g in doubling_gaps(phi, [128, 256, 512], k=1)]
        runs.append({"symbol": phi.to_dict(), "gaps": gaps,
                     "strictly_decreasing": gaps[0] > gaps[1] > gaps[2]})
    return {"passed": all(r["strictly_decreasing"] for r in runs), "runs": runs}


def criterion_7(seed: int = 0, scale: float = 1.0) -> dict:
    rng = _rng(seed, 7)
    table = PrimeTable.default()
    N = 1024
    sigma = IndexSet.natural(N)
    violations = 0
    worst = -math.inf
    for _ in range(20):
        k = int(rng.integers(1, 4))
        axes = sorted(rng.choice(np.arange(6), size=k, replace=False).tolist())
        phi = Symbol.random(rng, bandwidth=int(rng.integers(1, 4)), axes=axes, density=0.7)
        phi = phi + Symbol.constant(float(rng.normal()))
        lhs = hs_norm_sq(assemble_multiplicative(phi, sigma, table)) / N
        rhs = l2_norm_sq(phi)
        worst = max(worst, lhs - rhs)
        if not _finite(lhs, rhs) or lhs > rhs * (1 + 1e-12 * scale):
            violations += 1
    return {"passed": violations == 0, "violations": violations, "largest_excess": worst}


def criterion_8(seed: int = 0, scale: float = 1.0) -> dict:
    N = 10**6
    table = PrimeTable.default()
    lo, hi = 0.75, 1.30
    ratios = {}
    for k in (1, 2, 3):
        logs = [math.log(table.prime(i)) for i in range(k)]
        count = len(smooth_set(k, N, table))
        assert count == lattice_count(logs, math.log(N)).count
        ratios[k] = count * math.factorial(k) * math.prod(logs) / math.log(N) ** k
    return {"passed": all(lo <= r <= hi for r in ratios.values()),
            "ratios": {str(k): r for k, r in ratios.items()}, "interval": [lo, hi]}


def criterion_9(seed: int = 0, scale: float = 1.0) -> dict:
    rng = _rng(seed, 9)
    table = PrimeTable.default()
    worst = 0.0
    upper_violations = 0
    for i in range(20):
        basis = "sine" if i % 2 else "power"
        h = DilationVector.random(rng, max_index=int(rng.integers(2, 40)),
                                  terms=int(rng.integers(1, 6)), basis=basis)
        sigma = _random_multiplicative_set(rng)
        direct = gram_matrix(h, sigma, table)
        fourier = assemble_multiplicative(lift_symbol(h, table), sigma, table)
        worst = max(worst, float(np.max(np.abs(direct - fourier))))
        middle = geometric_mean_det(direct, zero_if_singular=True)
        if not middle <= h.norm_sq + INEQUALITY_SLACK * scale:
            upper_violations += 1
    e1 = DilationVector("power", {1: 1.0})
    det_e1 = float(np.linalg.det(gram_matrix(e1, IndexSet.natural(64), table)).real)
    tol = 1e-12 * scale
    return {"passed": worst <= tol and det_e1 == 1.0 and upper_violations == 0,
            "max_entry_difference": worst, "tolerance": tol, "det_e1": det_e1,
            "upper_violations": upper_violations}


def criterion_10(seed: int = 0, scale: float = 1.0) -> dict:
    rng = _rng(seed, 10)
    table = PrimeTable.default()
    slack = INEQUALITY_SLACK * scale
    worst = -math.inf
    violations = 0
    for trial in range(10):
        k = 1 + trial % 2
        phi = Symbol.random_positive(rng, variables=k, bandwidth=int(rng.integers(1, 4)))
        if trial % 3 == 2:
            sigma = _random_multiplicative_set(rng)
        else:
            sigma = folner_box(k, 48 if k == 1 else 12)
        lo, hi = grid_range(phi)
        base = eigenvalues(assemble_multiplicative(phi, sigma, table) if sigma.mode == "multiplicative"
                           else assemble_additive(phi, sigma)).eigenvalues
        R = 256 if k == 1 else 64
        for level in np.linspace(lo, hi, 6)[1:]:
            clamped = clamped_symbol(phi, float(level), R)
            mat = (assemble_multiplicative(clamped, sigma, table) if sigma.mode == "multiplicative"
                   else assemble_additive(clamped, sigma))
            lam = eigenvalues(mat).eigenvalues
            excess = float(np.max(lam - base))
            worst = max(worst, excess)
            if not excess <= slack:
                violations += 1
    return {"passed": violations == 0, "violations": violations, "largest_excess": worst,
            "slack": slack}


CRITERIA: dict[int, tuple[str, str, float, Callable]] = {
    1: ("classical determinant limit, 2 + cos, N = 512", "first Szego theorem (circle)", 10, criterion_1),
    2: ("determinant sandwich, 50 symbols x 10 sets x 2 modes", "two-sided determinant bound", 60, criterion_2),
    3: ("block decomposition spectrum, N = 256, k <= 2", "finite-variable block structure", 60, criterion_3),
    4: ("smooth-number series identities", "limit-measure mass identity", 30, criterion_4),
    5: ("non-Folner second moment, N = 2048", "non-Folner trace limit", 180, criterion_5),
    6: ("non-Folner determinant root doubling gaps", "non-Folner determinant limit", 120, criterion_6),
    7: ("Hilbert-Schmidt bound, N = 1024", "Hilbert-Schmidt control", 20, criterion_7),
    8: ("smooth-number lattice asymptotics, N = 10^6", "lattice-point volume asymptotics", 30, criterion_8),
    9: ("dilation Gram representation", "Gram determinants of dilations", 30, criterion_9),
    10: ("clamp eigenvalue monotonicity", "truncation min(phi, n) convergence", 30, criterion_10),
}


def run_criterion(number: int, seed: int = 0, scale: float = 1.0) -> CriterionResult:
    name, theorem, budget, fn = CRITERIA[number]
    start = time.perf_counter()
    try:
        details = fn(seed=seed, scale=scale)
        passed = bool(details.pop("passed"))
    except Exception as exc:  # a crash is a failed criterion, reported not raised
        details, passed = {"error": f"{type(exc).__name__}: {exc}"}, False
    seconds = time.perf_counter() - start
    return CriterionResult(number, name, theorem, passed, budget, seconds, details)


def run_all(seed: int = 0, scale: float = 1.0, threads: int = 1,
            numbers: list[int] | None = None) -> list[CriterionResult]:
    """Run the criteria (all by default); results come back in criterion order regardless of ``threads``."""
    numbers = sorted(CRITERIA if numbers is None else numbers)
    if threads <= 1:
        return [run_criterion(n, seed, scale) for n in numbers]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda n: run_criterion(n, seed, scale), numbers))


def theorem_matrix(results: list[CriterionResult]) -> str:
    width = max(len(r.theorem) for r in results)
    lines = [f"{'result':6}  {'#':>2}  {'statement':{width}}  check"]
    for r in results:
        lines.append(f"{'PASS' if r.passed else 'FAIL':6}  {r.number:2d}  {r.theorem:{width}}  {r.name}")
    return "\n".join(lines)
