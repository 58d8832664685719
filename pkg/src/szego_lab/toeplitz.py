"""Truncated Toeplitz matrices of a symbol.

Additive mode indexes rows and columns by points of ``Z^d`` and puts
``coeff(xi_j - xi_i)`` at ``(i, j)``.  Multiplicative mode indexes by positive
integers and puts ``coeff(label(j / i))`` there, so entries only depend on the
ratio ``j / i``.

Matrices are returned as dense numpy arrays: ``float64`` when every
coefficient is real, ``complex128`` otherwise.
"""

from __future__ import annotations

import csv
import io
from typing import TextIO

import numpy as np

from .config import max_dim
from .errors import CapacityError
from .indexing import IndexSet, PrimeTable, rational_of
from .symbol import Symbol

__all__ = [
    "assemble_additive",
    "assemble_multiplicative",
    "assemble",
    "is_hermitian",
    "check_hermitian",
    "hs_norm_sq",
    "dump_csv",
]


def _dtype(s: Symbol):
    return float if all(v.imag == 0 for _, v in s.items()) else complex


def _check_size(n: int, max_size: int | None) -> None:
    cap = max_dim() if max_size is None else max_size
    if n > cap:
        raise CapacityError(f"matrix dimension {n} exceeds cap {cap}", required=n)


def assemble_additive(s: Symbol, sigma: IndexSet, max_size: int | None = None) -> np.ndarray:
    """``{coeff(xi_j - xi_i)}`` over an additive index set."""
    if sigma.mode != "additive":
        raise ValueError("assemble_additive needs an additive index set")
    n = len(sigma)
    _check_size(n, max_size)
    d = sigma.dimension
    out = np.zeros((n, n), dtype=_dtype(s))
    pos = sigma.position
    real = out.dtype.kind == "f"
    for kappa, value in s.items():
        value = value.real if real else value
        if kappa.dimension() > d:
            # differences of points in Z^d never reach this frequency
            continue
        shift = kappa.padded(d)
        for i, xi in enumerate(sigma.labels):
            j = pos.get(tuple(a + b for a, b in zip(xi, shift)))
            if j is not None:
                out[i, j] = value
    return out


def assemble_multiplicative(s: Symbol, sigma: IndexSet, table: PrimeTable | None = None,
                            max_size: int | None = None) -> np.ndarray:
    """``{coeff(label(j / i))}`` over a set of positive integers.

    Each frequency ``kappa`` in the support is turned into its reduced
    rational ``a / b``; it contributes at every ``(i, j)`` with ``b | i`` and
    ``j = i a / b``.
    """
    if sigma.mode != "multiplicative":
        raise ValueError("assemble_multiplicative needs a multiplicative index set")
    table = table or PrimeTable.default()
    n = len(sigma)
    _check_size(n, max_size)
    labels = np.asarray(sigma.labels, dtype=np.int64)
    if n:
        table.check(int(labels[-1]))
    out = np.zeros((n, n), dtype=_dtype(s))
    if not n:
        return out
    top = int(labels[-1])
    real = out.dtype.kind == "f"
    for kappa, value in s.items():
        value = value.real if real else value
        q = rational_of(kappa, table)
        a, b = q.numerator, q.denominator
        if a > top or b > top:
            continue
        rows = np.flatnonzero(labels % b == 0)
        targets = labels[rows] // b * a
        cols = np.searchsorted(labels, targets)
        cols = np.minimum(cols, n - 1)
        hit = labels[cols] == targets
        out[rows[hit], cols[hit]] = value
    return out


def assemble(s: Symbol, sigma: IndexSet, table: PrimeTable | None = None,
             max_size: int | None = None) -> np.ndarray:
    """Dispatch on ``sigma.mode``."""
    if sigma.mode == "additive":
        return assemble_additive(s, sigma, max_size=max_size)
    return assemble_multiplicative(s, sigma, table, max_size=max_size)


def is_hermitian(m: np.ndarray, atol: float = 0.0) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, rtol=0, atol=atol)


def check_hermitian(m: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    m = np.asarray(m)
    if not is_hermitian(m, atol=atol * max(1.0, float(np.max(np.abs(m), initial=0.0)))):
        raise ValueError("matrix is not Hermitian")
    return m


def hs_norm_sq(m: np.ndarray) -> float:
    """Squared Hilbert-Schmidt (Frobenius) norm."""
    m = np.asarray(m)
    return float(np.sum(np.abs(m) ** 2))


def dump_csv(m: np.ndarray, out: TextIO | None = None, nonzero_only: bool = False) -> str | None:
    """Write entries as ``row,col,re,im`` CSV (zero-based indices).

    Returns the CSV text when ``out`` is None.
    """
    m = np.asarray(m)
    sink = io.StringIO() if out is None else out
    writer = csv.writer(sink, lineterminator="\r\n")
    writer.writerow(["row", "col", "re", "im"])
    for (r, c), v in np.ndenumerate(m):
        if nonzero_only and v == 0:
            continue
        v = complex(v)
        writer.writerow([r, c, repr(v.real), repr(v.imag)])
    if out is None:
        return sink.getvalue()
    return None
