"""Process-wide defaults."""

import os
from contextlib import contextmanager

DEFAULT_PRIME_LIMIT = 2_000_000
DEFAULT_LATTICE_CAP = 10**8
_FALLBACK_MAX_DIM = 4096
MAX_DIM_ENV = "SZEGO_LAB_MAX_DIM"

_override = None


def max_dim(default=_FALLBACK_MAX_DIM):
    """Dense-matrix dimension cap.

    Precedence: an active :func:`dimension_cap` block, then the
    ``SZEGO_LAB_MAX_DIM`` environment variable, then ``default``.
    """
    if _override is not None:
        return _override
    raw = os.environ.get(MAX_DIM_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return value if value > 0 else default


@contextmanager
def dimension_cap(value):
    """Temporarily force :func:`max_dim` to ``value`` (``None`` leaves it alone)."""
    global _override
    previous = _override
    if value is not None:
        if int(value) < 1:
            raise ValueError("dimension cap must be positive")
        _override = int(value)
    try:
        yield
    finally:
        _override = previous
