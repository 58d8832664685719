"""Numerical experiments with Szego limit theorems on finite- and infinite-dimensional tori.

Modules
-------
indexing
    Prime-exponent labels of rationals, index sets, smooth numbers, lattice counts.
symbol
    Trigonometric polynomials on the torus and their grid images.
toeplitz
    Additive and multiplicative Toeplitz truncations.
spectral
    Eigenvalues, determinants, and limit experiments along truncations.
decompose
    Block structure of truncations to ``{1, ..., N}`` and the limiting spectral series.
gram
    Gram matrices of dilation systems.
cli
    Batch runner behind the ``szego-lab`` command.
"""

from .errors import CapacityError, ConfigError, DomainError, SzegoLabError
from .indexing import (IndexSet, MultiIndex, PrimeTable, factorize, folner_box, lattice_count,
                       multiplicative_folner, rational_of, smooth_numbers, smooth_set)
from .symbol import GridSymbol, Symbol, from_grid, integrate, to_grid
from .toeplitz import assemble, assemble_additive, assemble_multiplicative
from .spectral import (MomentReport, SzegoBounds, eigenvalues, geometric_mean_det, logdet,
                       szego_bounds_check, trace_f)
from .decompose import (block_spectrum, doubling_gaps, limit_measure_moment, non_folner_detroot,
                        partition_classes)
from .gram import DilationVector, gram_matrix, lift_symbol

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "ConfigError", "DomainError", "SzegoLabError",
    "IndexSet", "MultiIndex", "PrimeTable", "factorize", "folner_box", "lattice_count",
    "multiplicative_folner", "rational_of", "smooth_numbers", "smooth_set",
    "GridSymbol", "Symbol", "from_grid", "integrate", "to_grid",
    "assemble", "assemble_additive", "assemble_multiplicative",
    "MomentReport", "SzegoBounds", "eigenvalues", "geometric_mean_det", "logdet",
    "szego_bounds_check", "trace_f",
    "block_spectrum", "doubling_gaps", "limit_measure_moment", "non_folner_detroot",
    "partition_classes",
    "DilationVector", "gram_matrix", "lift_symbol",
]
