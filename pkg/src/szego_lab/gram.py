"""Gram matrices of dilation systems ``T_m e_n = e_{mn}``.

A finitely supported vector ``h = sum c_n e_n`` is sent to the polynomial
``Uh = sum c_n z^label(n)`` on the infinite torus.  The Gram matrix of the
dilates ``{T_i h}`` is then the multiplicative Toeplitz matrix of ``|Uh|^2``.
:func:`gram_matrix` computes it from inner products of basis coefficients
only, so comparing it with ``assemble_multiplicative(lift_symbol(h), ...)``
checks that identity.

Two concrete systems share this code: ``"power"`` (``C_m f(w) = f(w^m)`` on
``H^2_0``) and ``"sine"`` (``D_m phi(x) = phi(mx)`` on ``L^2(0, 1)`` in the
basis ``sqrt(2) sin(n pi x)``).  The basis only matters for the quadrature
cross-check :func:`quadrature_gram`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigError
from .indexing import IndexSet, MultiIndex, PrimeTable, factorize
from .spectral import INEQUALITY_SLACK, SzegoBounds, geometric_mean_det
from .symbol import Symbol

__all__ = [
    "DilationVector",
    "lift_symbol",
    "gram_matrix",
    "log_mean_abs_sq",
    "gram_bounds_check",
    "quadrature_gram",
]

LOG_FLOOR = 1e-30


@dataclass(frozen=True)
class DilationVector:
    """Finitely supported vector ``sum c_n e_n``, ``n >= 1``."""

    basis: str
    coeffs: Mapping[int, complex]

    def __post_init__(self):
        if self.basis not in ("sine", "power"):
            raise ValueError(f"unknown basis {self.basis!r}")
        clean = {}
        for n, c in self.coeffs.items():
            n = int(n)
            if n < 1:
                raise ValueError("basis indices start at 1")
            if complex(c) != 0:
                clean[n] = complex(c)
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def random(cls, rng: np.random.Generator, max_index: int = 30, terms: int = 4,
               basis: str = "power") -> "DilationVector":
        support = rng.choice(np.arange(1, max_index + 1), size=terms, replace=False)
        return cls(basis, {int(n): complex(rng.normal(), rng.normal()) for n in support})

    @property
    def norm_sq(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def to_dict(self) -> dict:
        return {"basis": self.basis,
                "coeffs": [{"n": n, "re": c.real, "im": c.imag} for n, c in self.coeffs.items()]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: Mapping) -> "DilationVector":
        try:
            coeffs: dict[int, complex] = {}
            for entry in data["coeffs"]:
                n = int(entry["n"])
                if n in coeffs:
                    raise ConfigError(f"duplicate coefficient for n={n}")
                coeffs[n] = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
            return cls(str(data["basis"]), coeffs)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed dilation vector JSON: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "DilationVector":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"dilation vector JSON does not parse: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("dilation vector JSON must be an object")
        return cls.from_dict(data)


def lift_symbol(h: DilationVector, table: PrimeTable | None = None) -> Symbol:
    """Fourier coefficients of ``|Uh|^2``: ``coeff(kappa) = sum c_n conj(c_m)`` over ``label(n) - label(m) = kappa``."""
    table = table or PrimeTable.default()
    labels = {n: factorize(n, table) for n in h.coeffs}
    out: dict[MultiIndex, complex] = {}
    for n, cn in h.coeffs.items():
        for m, cm in h.coeffs.items():
            key = labels[n] - labels[m]
            out[key] = out.get(key, 0j) + cn * cm.conjugate()
    return Symbol(out)


def gram_matrix(h: DilationVector, sigma: IndexSet, table: PrimeTable | None = None) -> np.ndarray:
    """``{<T_i h, T_j h>}_{i, j in sigma}`` from basis coefficients.

    ``T_i h`` has coefficient ``c_n`` on ``e_{i n}``; the inner product is
    linear in its first argument.
    """
    if sigma.mode != "multiplicative":
        raise ValueError("dilation Gram matrices are indexed by positive integers")
    table = table or PrimeTable.default()
    if len(sigma) and h.coeffs:
        table.check(max(sigma.labels) * max(h.coeffs))
    columns: dict[int, int] = {}
    rows = []
    for i in sigma.labels:
        row = {}
        for n, c in h.coeffs.items():
            col = columns.setdefault(i * n, len(columns))
            row[col] = c
        rows.append(row)
    A = np.zeros((len(sigma), len(columns)), dtype=complex)
    for r, row in enumerate(rows):
        for col, c in row.items():
            A[r, col] = c
    return A @ A.conj().T


def _uh_grid(h: DilationVector, R: int, table: PrimeTable) -> np.ndarray:
    labels = {n: factorize(n, table) for n in h.coeffs}
    k = max((len(v) for v in labels.values()), default=0)
    axes = [a for a in range(k) if any(a < len(v) and v[a] for v in labels.values())]
    if not axes:
        return np.array([sum(h.coeffs.values())])
    spectrum = np.zeros((R,) * len(axes), dtype=complex)
    for n, c in h.coeffs.items():
        idx = tuple((labels[n][a] if a < len(labels[n]) else 0) % R for a in axes)
        spectrum[idx] += c
    return np.fft.ifftn(spectrum) * R ** len(axes)


def log_mean_abs_sq(h: DilationVector, table: PrimeTable | None = None, tol: float = 1e-10,
                    max_points: int = 2**22, floor: float = LOG_FLOOR) -> tuple[float, bool]:
    """``int log |Uh|^2 dm`` by grid doubling, with ``|Uh|^2`` floored at ``floor``.

    Returns ``(value, converged)``.  When ``Uh`` vanishes somewhere on the
    torus the floored estimate approaches the integral from below and may not
    reach ``tol``; the last estimate is then returned with ``converged=False``.
    """
    table = table or PrimeTable.default()
    top = max((max((abs(e) for e in factorize(n, table)), default=0) for n in h.coeffs), default=0)
    R = max(8, 2 * top + 2)
    previous = None
    while True:
        vals = np.abs(_uh_grid(h, R, table)) ** 2
        est = float(np.mean(np.log(np.maximum(vals, floor))))
        if previous is not None and abs(est - previous) < tol * max(1.0, abs(est)):
            return est, True
        if (2 * R) ** vals.ndim > max_points:
            return est, False
        previous = est
        R *= 2


def gram_bounds_check(h: DilationVector, sigma: IndexSet, table: PrimeTable | None = None,
                      slack: float = INEQUALITY_SLACK) -> tuple[SzegoBounds, bool]:
    """``exp(int log|Uh|^2) <= det(G_sigma)^(1/|sigma|) <= ||h||^2``.

    Returns the bounds record and whether the log integral converged.
    """
    if not h.coeffs:
        raise ValueError("h must be nonzero")
    log_mean, converged = log_mean_abs_sq(h, table)
    middle = geometric_mean_det(gram_matrix(h, sigma, table), zero_if_singular=True)
    return SzegoBounds(math.exp(log_mean), middle, h.norm_sq, slack), converged


def quadrature_gram(h: DilationVector, sigma: IndexSet, nodes: int = 8) -> np.ndarray:
    """Gram matrix of the dilates by direct numerical integration of the functions.

    ``"sine"``: ``int_0^1 phi(ix) conj(phi(jx)) dx`` with
    ``phi = sum c_n sqrt(2) sin(n pi x)``, composite Gauss-Legendre.
    ``"power"``: ``int_T f(w^i) conj(f(w^j)) dm`` with ``f = sum c_n w^n``,
    uniform rule on the circle.
    """
    labels = np.asarray(sigma.labels, dtype=float)
    ns = np.array(list(h.coeffs), dtype=float)
    cs = np.array(list(h.coeffs.values()), dtype=complex)
    top = int(labels.max() * ns.max()) if len(labels) and len(ns) else 1
    if h.basis == "sine":
        panels = top + 1
        x, w = np.polynomial.legendre.leggauss(nodes)
        edges = np.linspace(0.0, 1.0, panels + 1)
        half = 0.5 * np.diff(edges)
        xs = (edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)).ravel()
        ws = (half[:, None] * w[None, :]).ravel()
        # rows: dilates evaluated at the nodes
        vals = np.sqrt(2.0) * np.sin(np.pi * np.outer(labels, xs)[:, :, None] * ns[None, None, :]) @ cs
        return (vals * ws) @ vals.conj().T
    M = 2 * top + 2
    theta = 2 * np.pi * np.arange(M) / M
    vals = np.exp(1j * np.outer(labels, theta)[:, :, None] * ns[None, None, :]) @ cs
    return (vals / M) @ vals.conj().T
