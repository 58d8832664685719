"""Real trigonometric polynomials on finite-dimensional tori.

A :class:`Symbol` stores Fourier coefficients keyed by :class:`MultiIndex`.
A :class:`GridSymbol` stores samples on a uniform tensor grid over the
variables the symbol actually depends on, which is where nonlinear maps
(``min(phi, n)``, ``log phi``, ``1/phi``) and Haar-measure integrals are
evaluated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .indexing import MultiIndex

__all__ = [
    "Symbol",
    "GridSymbol",
    "to_grid",
    "from_grid",
    "evaluate",
    "clamp_min_max",
    "log_map",
    "reciprocal_map",
    "mean_of",
    "integrate",
    "l1_norm",
    "l2_norm_sq",
    "certify_positive",
    "grid_range",
    "minimum",
]

HERMITIAN_TOL = 1e-12
POSITIVITY_MARGIN = 1e-8


def _is_positive_representative(kappa: MultiIndex) -> bool:
    # first nonzero entry positive; the zero index represents itself
    for e in kappa:
        if e:
            return e > 0
    return True


class Symbol:
    """Hermitian-symmetric, finitely supported Fourier coefficients.

    Parameters
    ----------
    coefficients : mapping
        ``kappa -> complex``.  Keys are exponent sequences; trailing zeros are
        irrelevant.  Only one of ``kappa`` / ``-kappa`` needs to be supplied;
        a missing mirror is filled in with the conjugate.  If both are given
        they must be conjugate to within ``1e-12``.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coefficients: Mapping[Sequence[int], complex] | None = None):
        coeffs: dict[MultiIndex, complex] = {}
        for key, value in (coefficients or {}).items():
            kappa = MultiIndex(key)
            coeffs[kappa] = coeffs.get(kappa, 0.0) + complex(value)
        full: dict[MultiIndex, complex] = {}
        for kappa, value in coeffs.items():
            mirror = -kappa
            if mirror in coeffs:
                other = coeffs[mirror]
                if abs(value - other.conjugate()) > HERMITIAN_TOL * max(1.0, abs(value)):
                    raise ValueError(
                        f"coefficients at {tuple(kappa)} and {tuple(mirror)} are not conjugate"
                    )
                # symmetrise so that evaluate() is real to rounding
                value = 0.5 * (value + other.conjugate())
            if value == 0:
                continue
            full[kappa] = value
            if kappa != mirror:
                full[mirror] = value.conjugate()
        self._coeffs = full

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, c: float) -> "Symbol":
        return cls({(): c})

    @classmethod
    def cosine(cls, mean: float, amplitude: float = 1.0, variable: int = 0) -> "Symbol":
        """``mean + amplitude * cos(theta_variable)``."""
        e = [0] * variable + [1]
        return cls({(): mean, tuple(e): amplitude / 2})

    @classmethod
    def random(cls, rng: np.random.Generator, variables: int = 1, bandwidth: int = 2,
               density: float = 0.6, scale: float = 1.0,
               axes: Sequence[int] | None = None) -> "Symbol":
        """Random real trigonometric polynomial with zero mean.

        Each frequency in the box ``[-bandwidth, bandwidth]^variables`` (up to
        the ``±`` mirror) is kept with probability ``density``.
        """
        axes = tuple(range(variables)) if axes is None else tuple(axes)
        width = max(axes) + 1 if axes else 0
        coeffs: dict = {}
        for offsets in np.ndindex(*([2 * bandwidth + 1] * len(axes))):
            vec = [0] * width
            for ax, o in zip(axes, offsets):
                vec[ax] = o - bandwidth
            kappa = MultiIndex(vec)
            if not kappa or not _is_positive_representative(kappa):
                continue
            if rng.random() > density:
                continue
            coeffs[kappa] = scale * complex(rng.normal(), rng.normal()) / 2
        return cls(coeffs)

    @classmethod
    def random_positive(cls, rng: np.random.Generator, variables: int = 1, bandwidth: int = 2,
                        margin: float | None = None, axes: Sequence[int] | None = None,
                        density: float = 0.6) -> "Symbol":
        """Random strictly positive trigonometric polynomial.

        The mean is raised so that the certified grid minimum equals
        ``margin`` (drawn from ``[0.05, 1.5]`` when not given).
        """
        base = cls.random(rng, variables, bandwidth, density=density, axes=axes)
        if margin is None:
            margin = float(rng.uniform(0.05, 1.5))
        if not base.support():
            return cls.constant(1.0 + margin)
        return base + cls.constant(margin - minimum(base))

    # -- container protocol ------------------------------------------
    @property
    def coefficients(self) -> dict[MultiIndex, complex]:
        return dict(self._coeffs)

    def coeff(self, kappa: Sequence[int]) -> complex:
        return self._coeffs.get(MultiIndex(kappa), 0j)

    def support(self) -> list[MultiIndex]:
        return sorted(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def __len__(self):
        return len(self._coeffs)

    def __eq__(self, other):
        return isinstance(other, Symbol) and self._coeffs == other._coeffs

    def __hash__(self):
        return hash(frozenset(self._coeffs.items()))

    def __repr__(self):
        terms = ", ".join(f"{tuple(k)}: {v:.6g}" for k, v in sorted(self._coeffs.items())[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} terms)"
        return f"Symbol({{{terms}{more}}})"

    # -- structure ------------------------------------------------------
    @property
    def variable_count(self) -> int:
        return max((k.dimension() for k in self._coeffs), default=0)

    def active_axes(self) -> tuple[int, ...]:
        """Variables (zero-based) the symbol actually depends on."""
        axes = set()
        for kappa in self._coeffs:
            axes.update(i for i, e in enumerate(kappa) if e)
        return tuple(sorted(axes))

    @property
    def bandwidth(self) -> int:
        return max((max((abs(e) for e in k), default=0) for k in self._coeffs), default=0)

    @property
    def mean(self) -> float:
        return self.coeff(()).real

    def restrict(self, k: int) -> "Symbol":
        """Keep only frequencies in the first ``k`` variables (conditional expectation)."""
        return Symbol({kap: v for kap, v in self._coeffs.items() if kap.dimension() <= k})

    # -- algebra --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Symbol):
            other = Symbol.constant(float(other))
        out = dict(self._coeffs)
        for kap, v in other._coeffs.items():
            out[kap] = out.get(kap, 0j) + v
        return Symbol(out)

    __radd__ = __add__

    def __neg__(self):
        return Symbol({k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Symbol) else -float(other))

    def __mul__(self, other):
        if not isinstance(other, Symbol):
            c = float(other)
            return Symbol({k: c * v for k, v in self._coeffs.items()})
        out: dict[MultiIndex, complex] = {}
        for ka, va in self._coeffs.items():
            for kb, vb in other._coeffs.items():
                key = ka + kb
                out[key] = out.get(key, 0j) + va * vb
        return Symbol({k: v for k, v in out.items() if abs(v) > 0})

    __rmul__ = __mul__

    def __pow__(self, m: int):
        if m < 0:
            raise ValueError("only non-negative integer powers")
        result = Symbol.constant(1.0)
        for _ in range(m):
            result = result * self
        return result

    # -- evaluation -----------------------------------------------------
    def __call__(self, *theta: float) -> float:
        return evaluate(self, theta)

    # -- serialisation --------------------------------------------------
    def to_dict(self) -> dict:
        coeffs = []
        for kappa in sorted(self._coeffs):
            if not _is_positive_representative(kappa):
                continue
            v = self._coeffs[kappa]
            coeffs.append({"kappa": list(kappa), "re": v.real, "im": v.imag})
        return {"k": self.variable_count, "coeffs": coeffs}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: Mapping) -> "Symbol":
        try:
            k = int(data.get("k", 0))
            raw = data["coeffs"]
            coeffs = {}
            for entry in raw:
                kappa = MultiIndex(int(e) for e in entry["kappa"])
                value = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
                if kappa in coeffs:
                    raise ConfigError(f"duplicate coefficient for kappa={list(kappa)}")
                coeffs[kappa] = value
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed symbol JSON: {exc}") from exc
        try:
            sym = cls(coeffs)
        except ValueError as exc:
            raise ConfigError(f"malformed symbol JSON: {exc}") from exc
        if sym.variable_count > k:
            raise ConfigError(f"symbol declares k={k} but uses {sym.variable_count} variables")
        return sym

    @classmethod
    def from_json(cls, text: str) -> "Symbol":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"symbol JSON does not parse: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("symbol JSON must be an object")
        return cls.from_dict(data)


def evaluate(s: Symbol, point: Sequence[float]) -> float:
    """``sum_kappa coeff(kappa) * exp(i kappa . theta)``; the imaginary residue must vanish."""
    point = tuple(float(t) for t in point)
    total = 0j
    for kappa, v in s.items():
        if len(kappa) > len(point):
            raise ValueError(f"point has {len(point)} angles but the symbol uses {len(kappa)}")
        total += v * complex(math.cos(phase := sum(e * t for e, t in zip(kappa, point))),
                             math.sin(phase))
    if abs(total.imag) >= 1e-10 * max(1.0, abs(total)):
        raise ArithmeticError(f"imaginary residue {total.imag:.3e} at {point}")
    return total.real


@dataclass(frozen=True, eq=False)
class GridSymbol:
    """Samples of a real function on the uniform grid ``theta = 2 pi r / R``.

    ``axes`` lists which torus variables the grid dimensions correspond to;
    the function is constant in every other variable.
    """

    axes: tuple[int, ...]
    resolution: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if np.iscomplexobj(vals):
            if np.max(np.abs(vals.imag), initial=0.0) > 1e-10:
                raise ValueError("grid values must be real")
            vals = vals.real
        vals = np.array(vals, dtype=float)
        if vals.shape != (self.resolution,) * len(self.axes):
            raise ValueError(f"values shape {vals.shape} does not match grid")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def variable_count(self) -> int:
        return len(self.axes)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "GridSymbol":
        return GridSymbol(self.axes, self.resolution, fn(self.values))

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


def _place(s: Symbol, axes: tuple[int, ...], R: int) -> np.ndarray:
    spectrum = np.zeros((R,) * len(axes), dtype=complex)
    for kappa, v in s.items():
        idx = tuple(((kappa[a] if a < len(kappa) else 0) % R) for a in axes)
        spectrum[idx] += v
    return spectrum


def to_grid(s: Symbol, R: int, axes: Sequence[int] | None = None) -> GridSymbol:
    """Sample ``s`` on an ``R``-point-per-axis grid over ``axes``.

    ``R`` must be at least ``2 * bandwidth + 1`` so no two frequencies alias.
    """
    if axes is None:
        axes = s.active_axes() or (0,)
    axes = tuple(axes)
    missing = set(s.active_axes()) - set(axes)
    if missing:
        raise ValueError(f"grid axes {axes} omit active variables {sorted(missing)}")
    need = 2 * s.bandwidth + 1
    if R < need:
        raise ValueError(f"resolution {R} aliases; bandwidth {s.bandwidth} needs R >= {need}")
    spectrum = _place(s, axes, R)
    values = np.fft.ifftn(spectrum) * R ** len(axes) if axes else spectrum
    return GridSymbol(axes, R, values.real)


def from_grid(g: GridSymbol, drop_below: float = 1e-15) -> Symbol:
    """Fourier coefficients of the grid function, frequencies ``|kappa_i| <= (R-1)//2``.

    Coefficients smaller than ``drop_below`` times the largest one are dropped.
    """
    R = g.resolution
    k = len(g.axes)
    if k == 0:
        return Symbol.constant(float(g.values))
    spectrum = np.fft.fftn(g.values) / R**k
    half = (R - 1) // 2
    freqs = np.arange(-half, half + 1)
    idx = np.ix_(*([freqs % R] * k))
    block = spectrum[idx]
    scale = np.max(np.abs(block), initial=0.0)
    width = max(g.axes) + 1
    coeffs = {}
    for pos in zip(*np.nonzero(np.abs(block) > drop_below * scale)):
        vec = [0] * width
        for ax, p in zip(g.axes, pos):
            vec[ax] = int(freqs[p])
        kappa = MultiIndex(vec)
        if not _is_positive_representative(kappa):
            continue
        coeffs[kappa] = complex(block[pos])
    return Symbol(coeffs)


def clamp_min_max(g: GridSymbol, upper: float | None = None,
                  lower: float | None = None) -> GridSymbol:
    """Pointwise ``min(phi, upper)`` and/or ``max(phi, lower)``."""
    vals = g.values
    if upper is not None:
        vals = np.minimum(vals, upper)
    if lower is not None:
        vals = np.maximum(vals, lower)
    return GridSymbol(g.axes, g.resolution, vals)


def _require_positive(g: GridSymbol, what: str) -> None:
    low = g.min()
    if not low > 0:
        raise DomainError(f"{what} needs a positive symbol; grid minimum is {low:.6g}")


def log_map(g: GridSymbol) -> GridSymbol:
    _require_positive(g, "log")
    return g.map(np.log)


def reciprocal_map(g: GridSymbol) -> GridSymbol:
    _require_positive(g, "reciprocal")
    return g.map(np.reciprocal)


_NAMED = {
    "identity": lambda v: v,
    "log": np.log,
    "reciprocal": np.reciprocal,
    "square": np.square,
    "abs": np.abs,
}


def _resolve(f) -> tuple[Callable[[np.ndarray], np.ndarray], str | None]:
    """Return a vectorised callable and the name of its positivity requirement."""
    if callable(f):
        return f, None
    if isinstance(f, (int, np.integer)) and not isinstance(f, bool):
        m = int(f)
        return (lambda v: v**m), ("power" if m < 0 else None)
    if isinstance(f, tuple) and len(f) == 2 and f[0] == "power":
        m = int(f[1])
        return (lambda v: v**m), ("power" if m < 0 else None)
    if isinstance(f, str):
        if f.startswith("power:"):
            return _resolve(("power", int(f.split(":", 1)[1])))
        if f in _NAMED:
            return _NAMED[f], (f if f in ("log", "reciprocal") else None)
    if isinstance(f, Mapping):
        # custom table: piecewise-linear interpolation through (x, y) knots
        xs = np.asarray(f["x"], dtype=float)
        ys = np.asarray(f["y"], dtype=float)
        return (lambda v: np.interp(v, xs, ys)), None
    raise ValueError(f"unknown scalar function {f!r}")


def mean_of(f, g: GridSymbol) -> float:
    """Grid average of ``f(phi)``, i.e. the trapezoid rule for ``int f(phi) dm``.

    ``f`` may be ``"identity"``, ``"log"``, ``"reciprocal"``, ``"square"``,
    an integer power, ``("power", m)``, ``"power:m"``, a vectorised callable,
    or a ``{"x": [...], "y": [...]}`` interpolation table.
    """
    fn, needs = _resolve(f)
    if needs is not None:
        _require_positive(g, needs)
    return float(np.mean(fn(g.values)))


def integrate(s: Symbol, f="identity", tol: float = 1e-10, start: int | None = None,
              max_points: int = 2**22, transform: Callable[[GridSymbol], GridSymbol] | None = None
              ) -> float:
    """``int f(phi) dm`` by repeated grid doubling until two estimates agree to ``tol``.

    ``transform`` is applied to each grid before ``f`` (e.g. a clamp), so
    non-band-limited images such as ``log min(phi, n)`` converge too.
    A NaN estimate is returned as is.
    """
    axes = s.active_axes() or (0,)
    R = start or max(2 * s.bandwidth + 1, 8)
    R = max(R, 2 * s.bandwidth + 1)

    def estimate(res):
        g = to_grid(s, res, axes)
        if transform is not None:
            g = transform(g)
        return mean_of(f, g)

    previous = estimate(R)
    if math.isnan(previous):
        return previous
    while True:
        R *= 2
        if R ** len(axes) > max_points:
            raise ArithmeticError(
                f"quadrature did not reach tol={tol} before {max_points} grid points"
            )
        current = estimate(R)
        if abs(current - previous) < tol * max(1.0, abs(current)):
            return current
        previous = current


def l1_norm(g: GridSymbol | Symbol, tol: float = 1e-10) -> float:
    """``int |phi| dm``."""
    if isinstance(g, Symbol):
        low, _ = grid_range(g)
        if low >= 0:
            return g.mean
        return integrate(g, "abs", tol=tol)
    return float(np.mean(np.abs(g.values)))


def l2_norm_sq(s: Symbol) -> float:
    """``sum |coeff|**2`` (Parseval)."""
    return float(sum(abs(v) ** 2 for _, v in s.items()))


def grid_range(s: Symbol, oversample: int = 4) -> tuple[float, float]:
    """Minimum and maximum over an alias-free grid oversampled ``oversample`` times."""
    R = oversample * (2 * s.bandwidth + 1)
    g = to_grid(s, R)
    return g.min(), g.max()


def minimum(s: Symbol, oversample: int = 8, starts: int = 8) -> float:
    """Minimum of ``phi`` over the torus: grid search, then local polishing.

    The lowest ``starts`` grid points seed a quasi-Newton search on the
    analytic function, which removes the grid error in the minimum.
    """
    from scipy.optimize import minimize

    axes = s.active_axes()
    if not axes:
        return s.mean
    R = oversample * (2 * s.bandwidth + 1)
    g = to_grid(s, R, axes)
    K = np.array([[kappa[a] if a < len(kappa) else 0 for a in axes] for kappa, _ in s.items()],
                 dtype=float)
    c = np.array([v for _, v in s.items()], dtype=complex)

    def f(theta):
        w = c * np.exp(1j * (K @ theta))
        return float(w.real.sum()), (1j * w @ K).real

    best = g.min()
    flat = np.argsort(g.values, axis=None)[:starts]
    for idx in np.array(np.unravel_index(flat, g.values.shape)).T:
        res = minimize(f, 2 * np.pi * idx / R, jac=True, method="BFGS")
        best = min(best, float(res.fun))
    return best


def certify_positive(s: Symbol, margin: float = POSITIVITY_MARGIN) -> float:
    """Return the polished minimum of ``s``, raising if it is below ``margin``."""
    low = minimum(s)
    if low < margin:
        raise DomainError(f"symbol is not certified positive: grid minimum {low:.6g} < {margin:g}")
    return low
