"""Command-line experiment runner.

``szego-lab run --config exp.json --out reports/`` runs one experiment and
writes ``report.csv`` (columns ``size, statistic, reference, gap``) and
``summary.json``.  ``szego-lab verify-all`` runs the acceptance suite and
prints the statement-to-check matrix.

Exit codes: 0 all assertions pass, 1 an assertion failed (NaN counts as a
failure, as does a quadrature that does not converge), 2 the configuration or an input file is invalid, 3 a capacity
limit was hit.  Every non-zero exit writes exactly one ``key=value`` line to
stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import acceptance
from .config import MAX_DIM_ENV, dimension_cap, max_dim
from .decompose import (block_spectrum, limit_measure_moment, log2_series, mass_series,
                        partition_classes, smooth_tail_bound)
from .errors import CapacityError, ConfigError, DomainError
from .gram import DilationVector, gram_matrix, lift_symbol, log_mean_abs_sq
from .indexing import (IndexSet, PrimeTable, folner_box, lattice_count, multiplicative_folner,
                       smooth_set)
from .spectral import INEQUALITY_SLACK, MomentReport, eigenvalues, folner_limit_experiment
from .symbol import Symbol, _resolve
from .toeplitz import assemble, assemble_multiplicative, dump_csv

__all__ = ["ExperimentConfig", "load_config", "run", "verify_all", "main"]

SCHEMA_VERSION = 1
CLI_DEFAULT_MAX_DIM = 2048

KINDS = ("szego-folner", "szego-natural", "measure-series", "identity", "gram", "lattice",
         "decompose-bench")

DEFAULT_TOLERANCES = {
    "szego-folner": {"gap": 5e-3},
    "szego-natural": {"gap": 1e-2},
    "measure-series": {"gap": 1e-2},
    "identity": {},  # default is the rigorous tail bound at the final cutoff
    "gram": {"representation": 1e-12, "slack": INEQUALITY_SLACK},
    "lattice": {"below": 0.25, "above": 0.30},
    "decompose-bench": {"deviation": 1e-9},
}


@dataclass
class ExperimentConfig:
    kind: str
    schedule: list[int]
    symbol: Symbol | None = None
    vector: DilationVector | None = None
    statistic: Any = "log"
    mode: str = "additive"
    dimension: int | None = None
    k: int | None = None
    cutoff: int = 10**4
    N: int | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    dump_matrix: bool = False
    dump_decomposition: bool = False
    out: str | None = None

    def tolerance(self, name: str, scale: float = 1.0) -> float:
        value = self.tolerances.get(name, DEFAULT_TOLERANCES[self.kind].get(name))
        if value is None:
            raise KeyError(name)
        return value * scale


def _read_json(path: Path, what: str) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path} is not valid JSON: {exc}") from exc


def _source(data: dict, key: str, base: Path, parse) -> Any:
    inline, path = data.get(key), data.get(f"{key}_file")
    if inline is not None and path is not None:
        raise ConfigError(f"give either {key} or {key}_file, not both")
    if path is not None:
        inline = _read_json(base / path, f"{key} file")
    if inline is None:
        return None
    if not isinstance(inline, dict):
        raise ConfigError(f"{key} must be a JSON object")
    return parse(inline)


def _positive_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{what} must be a positive integer, got {value!r}")
    return value


def parse_config(data: Any, base: Path = Path(".")) -> ExperimentConfig:
    """Validate a decoded JSON config; file references resolve against ``base``."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {"kind", "schedule", "symbol", "symbol_file", "vector", "vector_file", "statistic",
             "mode", "dimension", "k", "cutoff", "N", "tolerances", "dump_matrix",
             "dump_decomposition", "out"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}; got {kind!r}")

    schedule = data.get("schedule")
    if not isinstance(schedule, list) or not schedule:
        raise ConfigError("schedule must be a non-empty list of positive integers")
    schedule = [_positive_int(v, "schedule entry") for v in schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigError("schedule must be strictly increasing")

    tolerances = data.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances must be an object")
    for name, value in tolerances.items():
        if name not in DEFAULT_TOLERANCES[kind] and not (kind == "identity" and name == "gap"):
            raise ConfigError(f"tolerance {name!r} does not apply to {kind}")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0 \
                or not math.isfinite(value):
            raise ConfigError(f"tolerance {name!r} must be a positive number, got {value!r}")

    symbol = _source(data, "symbol", base, Symbol.from_dict)
    vector = _source(data, "vector", base, DilationVector.from_dict)
    needs_symbol = kind in ("szego-folner", "szego-natural", "measure-series", "decompose-bench")
    if needs_symbol and symbol is None:
        raise ConfigError(f"{kind} needs a symbol (inline or symbol_file)")
    if kind == "gram" and vector is None:
        raise ConfigError("gram needs a vector (inline or vector_file)")

    statistic = data.get("statistic", "log")
    try:
        _resolve(statistic)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"unknown statistic {statistic!r}") from exc

    mode = data.get("mode", "additive")
    if mode not in ("additive", "multiplicative"):
        raise ConfigError(f"mode must be additive or multiplicative, got {mode!r}")
    dimension = data.get("dimension")
    if dimension is not None:
        dimension = _positive_int(dimension, "dimension")
    k = data.get("k")
    if k is not None:
        k = _positive_int(k, "k")
    cutoff = _positive_int(data.get("cutoff", 10**4), "cutoff")
    N = data.get("N")
    if N is not None:
        N = _positive_int(N, "N")
    for flag in ("dump_matrix", "dump_decomposition"):
        if not isinstance(data.get(flag, False), bool):
            raise ConfigError(f"{flag} must be true or false")
    out = data.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("out must be a path string")

    return ExperimentConfig(kind, schedule, symbol, vector, statistic, mode, dimension, k, cutoff,
                            N, dict(tolerances), data.get("dump_matrix", False),
                            data.get("dump_decomposition", False), out)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    path = Path(path)
    return parse_config(_read_json(path, "config"), path.parent)


# -- experiments ------------------------------------------------------------

@dataclass
class Assertion:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": _json_float(self.value),
                "threshold": _json_float(self.threshold), "detail": self.detail}


def _json_float(x):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _check(name: str, value: float, threshold: float, detail: str = "") -> Assertion:
    # comparisons with NaN are False, so NaN never passes
    return Assertion(name, bool(value <= threshold), value, threshold, detail)


@dataclass
class Outcome:
    report: MomentReport
    assertions: list[Assertion]
    timings: dict[str, float]
    matrix: np.ndarray | None = None
    decomposition: dict | None = None
    extra: dict = field(default_factory=dict)


def _finite_rows(report: MomentReport) -> Assertion:
    bad = sum(1 for (_, v), g in zip(report.rows, report.gaps)
              if not (math.isfinite(v) and math.isfinite(g)))
    bad += 0 if math.isfinite(report.reference) else 1
    return Assertion("finite", bad == 0, bad, 0, "non-finite entries in the report")


def _k_of(cfg: ExperimentConfig) -> int:
    return max(cfg.k or (cfg.symbol.variable_count if cfg.symbol else 1), 1)


def _exp_folner(cfg, scale, table, timings) -> Outcome:
    s = cfg.symbol
    if cfg.mode == "additive":
        d = cfg.dimension or max(s.active_axes(), default=0) + 1
        sigmas = [folner_box(d, L) for L in cfg.schedule]
    else:
        k = cfg.dimension or _k_of(cfg)
        sigmas = [multiplicative_folner(k, M, table) for M in cfg.schedule]
        for sigma in sigmas:
            if len(sigma) > max_dim():
                raise CapacityError(f"index set of size {len(sigma)} exceeds dimension cap {max_dim()}",
                                    required=len(sigma))
    t = time.perf_counter()
    report = folner_limit_experiment(s, sigmas, cfg.statistic, table)
    timings["experiment"] = time.perf_counter() - t
    tol = cfg.tolerance("gap", scale)
    checks = [_finite_rows(report), _check("final_gap", report.final_gap, tol)]
    matrix = assemble(s, sigmas[-1], table) if cfg.dump_matrix else None
    return Outcome(report, checks, timings, matrix)


def _natural_statistic(cfg, table, N):
    lam = block_spectrum(cfg.symbol, N, _k_of(cfg), table).eigenvalues
    if cfg.statistic == "log":
        if lam[0] <= 0:
            raise DomainError(f"T_N is not positive definite at N={N}")
        return math.exp(float(np.mean(np.log(lam))))
    return float(np.sum(_resolve(cfg.statistic)[0](lam)) / N)


def _exp_natural(cfg, scale, table, timings) -> Outcome:
    k = _k_of(cfg)
    t = time.perf_counter()
    lm = limit_measure_moment(cfg.symbol, cfg.statistic, k, cfg.cutoff, table)
    timings["series"] = time.perf_counter() - t
    if cfg.statistic == "log":
        reference = math.exp(lm.value)
        slack = reference * math.expm1(lm.tail_bound)
        name = "geometric-mean-det"
    else:
        reference, slack, name = lm.value, lm.tail_bound, "normalized-trace"
    t = time.perf_counter()
    rows = [(N, _natural_statistic(cfg, table, N)) for N in cfg.schedule]
    timings["blocks"] = time.perf_counter() - t
    report = MomentReport(name, rows, reference,
                          f"limiting spectral series, cutoff {cfg.cutoff}",
                          {"tail_bound": lm.tail_bound, "k": k})
    allowed = slack + cfg.tolerance("gap", scale)
    checks = [_finite_rows(report),
              _check("final_gap", report.final_gap, allowed, "tolerance plus series tail bound")]
    N = cfg.schedule[-1]
    matrix = assemble_multiplicative(cfg.symbol, IndexSet.natural(N), table) if cfg.dump_matrix else None
    dec = partition_classes(N, k, table).to_dict() if cfg.dump_decomposition else None
    return Outcome(report, checks, timings, matrix, dec)


def _exp_measure_series(cfg, scale, table, timings) -> Outcome:
    k = _k_of(cfg)
    N = cfg.N or 2048
    t = time.perf_counter()
    lam = block_spectrum(cfg.symbol, N, k, table).eigenvalues
    fn, _ = _resolve(cfg.statistic)
    reference = float(np.sum(fn(lam)) / N)
    timings["direct"] = time.perf_counter() - t
    rows, tails = [], []
    t = time.perf_counter()
    for cutoff in cfg.schedule:
        lm = limit_measure_moment(cfg.symbol, cfg.statistic, k, cutoff, table)
        rows.append((cutoff, lm.value))
        tails.append(lm.tail_bound)
    timings["series"] = time.perf_counter() - t
    report = MomentReport("limit-measure-series", rows, reference,
                          f"Tr f(T_N)/N by blocks, N = {N}", {"tail_bounds": tails, "k": k})
    allowed = tails[-1] + cfg.tolerance("gap", scale)
    checks = [_finite_rows(report),
              _check("final_gap", report.final_gap, allowed, "tolerance plus series tail bound")]
    dec = partition_classes(N, k, table).to_dict() if cfg.dump_decomposition else None
    matrix = assemble_multiplicative(cfg.symbol, IndexSet.natural(N), table) if cfg.dump_matrix else None
    return Outcome(report, checks, timings, matrix, dec)


def _exp_identity(cfg, scale, table, timings) -> Outcome:
    k = cfg.k or 1
    t = time.perf_counter()
    if k == 1:
        rows = [(c, log2_series(c)) for c in cfg.schedule]
        reference, source = 1.0, "sum [log2 n]/(n(n+1)) = 1"
    else:
        rows = [(c, mass_series(k, c, table)) for c in cfg.schedule]
        primes = [table.prime(i) for i in range(k)]
        reference = math.prod(p / (p - 1) for p in primes)
        source = "prod p/(p-1) over the first k primes"
    timings["series"] = time.perf_counter() - t
    tail = smooth_tail_bound(k, cfg.schedule[-1], table)
    report = MomentReport("smooth-series", rows, reference, source, {"tail_bound": tail, "k": k})
    tol = cfg.tolerances.get("gap", tail) * scale
    return Outcome(report, [_finite_rows(report), _check("final_gap", report.final_gap, tol)], timings)


def _exp_gram(cfg, scale, table, timings) -> Outcome:
    h = cfg.vector
    t = time.perf_counter()
    log_mean, converged = log_mean_abs_sq(h, table)
    reference = math.exp(log_mean)
    lifted = lift_symbol(h, table)
    rows, rep_err = [], 0.0
    for N in cfg.schedule:
        if N > max_dim():
            raise CapacityError(f"N={N} exceeds dimension cap {max_dim()}", required=N)
        sigma = IndexSet.natural(N)
        G = gram_matrix(h, sigma, table)
        rep_err = max(rep_err, float(np.max(np.abs(G - assemble_multiplicative(lifted, sigma, table)))))
        lam = eigenvalues(G).eigenvalues
        rows.append((N, math.exp(float(np.mean(np.log(lam)))) if lam[0] > 0 else 0.0))
    timings["experiment"] = time.perf_counter() - t
    report = MomentReport("gram-geometric-mean-det", rows, reference,
                          "exp(int log |Uh|^2 dm), grid quadrature",
                          {"log_integral_converged": converged, "norm_sq": h.norm_sq})
    slack = cfg.tolerance("slack", scale)
    checks = [_finite_rows(report),
              _check("representation", rep_err, cfg.tolerance("representation", scale),
                     "max |Gram - Toeplitz(|Uh|^2)|"),
              _check("upper_bound", max(v for _, v in rows) - h.norm_sq, slack, "detroot - ||h||^2")]
    if converged:
        checks.append(_check("lower_bound", reference - min(v for _, v in rows), slack,
                             "exp(int log|Uh|^2) - detroot"))
    matrix = gram_matrix(h, IndexSet.natural(cfg.schedule[-1]), table) if cfg.dump_matrix else None
    return Outcome(report, checks, timings, matrix)


def _exp_lattice(cfg, scale, table, timings) -> Outcome:
    k = cfg.k or 1
    logs = [math.log(table.prime(i)) for i in range(k)]
    rows, mismatches = [], 0
    t = time.perf_counter()
    for N in cfg.schedule:
        count = len(smooth_set(k, N, table))
        if count != lattice_count(logs, math.log(N)).count:
            mismatches += 1
        volume = math.log(N) ** k / (math.factorial(k) * math.prod(logs)) if N > 1 else math.nan
        rows.append((N, count / volume if N > 1 else 1.0))
    timings["experiment"] = time.perf_counter() - t
    report = MomentReport("count-over-volume", rows, 1.0,
                          "(log N)^k / (k! prod log p_j)", {"k": k})
    final = report.limit_estimate
    checks = [_finite_rows(report),
              Assertion("exact_count", mismatches == 0, mismatches, 0,
                        "smooth enumeration versus lattice count"),
              _check("ratio_below", 1.0 - final, cfg.tolerance("below", scale)),
              _check("ratio_above", final - 1.0, cfg.tolerance("above", scale))]
    return Outcome(report, checks, timings)


def _exp_bench(cfg, scale, table, timings) -> Outcome:
    k = _k_of(cfg)
    rows, bench = [], []
    for N in cfg.schedule:
        t0 = time.perf_counter()
        dense = eigenvalues(assemble_multiplicative(cfg.symbol, IndexSet.natural(N), table)).eigenvalues
        t1 = time.perf_counter()
        blocks = block_spectrum(cfg.symbol, N, k, table).eigenvalues
        t2 = time.perf_counter()
        dev = float(np.max(np.abs(dense - blocks)))
        rows.append((N, dev))
        bench.append({"N": N, "direct_seconds": t1 - t0, "block_seconds": t2 - t1})
        timings[f"direct_N{N}"] = t1 - t0
        timings[f"block_N{N}"] = t2 - t1
    report = MomentReport("spectrum-max-deviation", rows, 0.0, "dense eigensolve versus blocks",
                          {"k": k})
    checks = [_finite_rows(report),
              _check("max_deviation", max(v for _, v in rows), cfg.tolerance("deviation", scale))]
    N = cfg.schedule[-1]
    matrix = assemble_multiplicative(cfg.symbol, IndexSet.natural(N), table) if cfg.dump_matrix else None
    dec = partition_classes(N, k, table).to_dict() if cfg.dump_decomposition else None
    return Outcome(report, checks, timings, matrix, dec, {"bench": bench})


_RUNNERS = {
    "szego-folner": _exp_folner,
    "szego-natural": _exp_natural,
    "measure-series": _exp_measure_series,
    "identity": _exp_identity,
    "gram": _exp_gram,
    "lattice": _exp_lattice,
    "decompose-bench": _exp_bench,
}


def run(cfg: ExperimentConfig, out: str | os.PathLike | None = None, tolerance_scale: float = 1.0,
        table: PrimeTable | None = None) -> tuple[int, dict]:
    """Run one experiment, write its reports and return ``(exit_status, summary)``.

    Errors other than assertion failures propagate as exceptions; :func:`main`
    maps them to exit codes.
    """
    table = table or PrimeTable.default()
    start = time.perf_counter()
    outcome = _RUNNERS[cfg.kind](cfg, tolerance_scale, table, {})
    passed = all(a.passed for a in outcome.assertions)
    summary = {
        "schema": SCHEMA_VERSION,
        "kind": cfg.kind,
        "passed": passed,
        "assertions": [a.to_dict() for a in outcome.assertions],
        "report": outcome.report.to_dict(),
        "wall_seconds": {**outcome.timings, "total": time.perf_counter() - start},
        "tolerance_scale": tolerance_scale,
        **outcome.extra,
    }
    target = out or cfg.out
    if target is not None:
        target = Path(target)
        target.mkdir(parents=True, exist_ok=True)
        (target / "report.csv").write_bytes(outcome.report.to_csv().encode("utf-8"))
        if outcome.matrix is not None:
            (target / "matrix.csv").write_bytes(dump_csv(outcome.matrix).encode("utf-8"))
        if outcome.decomposition is not None:
            (target / "decomposition.json").write_text(json.dumps(outcome.decomposition),
                                                       encoding="utf-8")
        (target / "summary.json").write_text(json.dumps(summary, indent=2, default=_json_default),
                                             encoding="utf-8")
    return (0 if passed else 1), summary


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def verify_all(seed: int = 0, threads: int = 1, tolerance_scale: float = 1.0,
               out: str | os.PathLike | None = None, stream=None) -> tuple[int, list]:
    """Run the acceptance suite, print one line per check and the statement matrix."""
    stream = stream or sys.stdout
    results = acceptance.run_all(seed=seed, scale=tolerance_scale, threads=threads)
    for r in results:
        print(r.line(), file=stream)
    print(file=stream)
    print(acceptance.theorem_matrix(results), file=stream)
    if out is not None:
        target = Path(out)
        target.mkdir(parents=True, exist_ok=True)
        payload = {"schema": SCHEMA_VERSION, "seed": seed, "tolerance_scale": tolerance_scale,
                   "passed": all(r.passed for r in results),
                   "criteria": [r.to_dict() for r in results]}
        (target / "acceptance.json").write_text(json.dumps(payload, indent=2, default=_json_default),
                                                encoding="utf-8")
    return (0 if all(r.passed for r in results) else 1), results


# -- entry point ------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"bad arguments: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="experiment config (UTF-8 JSON)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised checks (default 0)")
    common.add_argument("--out", metavar="DIR", help="directory for report files")
    common.add_argument("--max-dim", type=int, default=None,
                        help=f"dense dimension cap (default {CLI_DEFAULT_MAX_DIM}, or ${MAX_DIM_ENV})")
    common.add_argument("--threads", type=int, default=1, help="worker threads for verify-all")
    common.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply every tolerance; 0 forces strict checks")
    common.add_argument("--dump-matrix", action="store_true",
                        help="also write matrix.csv (row, col, re, im) for the largest size")
    common.add_argument("--dump-decomposition", action="store_true",
                        help="also write decomposition.json (class -> members)")
    parser = _Parser(prog="szego-lab", description="Szego limit experiments on the torus.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("run", parents=[common], help="run one experiment config")
    sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    return parser


def _fail(code: int, kind: str, reason: str) -> int:
    reason = " ".join(str(reason).split()).replace('"', "'")
    print(f'szego-lab: exit={code} error={kind} reason="{reason}"', file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.tolerance_scale < 0 or not math.isfinite(args.tolerance_scale):
            raise ConfigError("--tolerance-scale must be a finite non-negative number")
        if args.max_dim is not None and args.max_dim < 1:
            raise ConfigError("--max-dim must be positive")
        cap = args.max_dim if args.max_dim is not None else max_dim(CLI_DEFAULT_MAX_DIM)
        cfg = load_config(args.config) if args.config else None
        if cfg is not None:
            cfg.dump_matrix |= args.dump_matrix
            cfg.dump_decomposition |= args.dump_decomposition
        with dimension_cap(cap):
            if args.command == "run":
                if cfg is None:
                    raise ConfigError("run needs --config")
                status, summary = run(cfg, args.out, args.tolerance_scale)
                failed = [a["name"] for a in summary["assertions"] if not a["passed"]]
                print(f"{cfg.kind}: {'PASS' if status == 0 else 'FAIL'} "
                      f"final_gap={summary['report']['final_gap']!r}")
                if status:
                    return _fail(1, "assertion", "failed: " + ",".join(failed))
                return 0
            status, results = verify_all(args.seed, args.threads, args.tolerance_scale, args.out)
            if cfg is not None:
                extra_status, _ = run(cfg, Path(args.out) / "config" if args.out else None,
                                      args.tolerance_scale)
                status = max(status, extra_status)
            if status:
                failed = [str(r.number) for r in results if not r.passed]
                return _fail(1, "assertion", "failed criteria: " + (",".join(failed) or "config run"))
            return 0
    except CapacityError as exc:
        return _fail(3, "capacity", exc)
    except (ConfigError, DomainError) as exc:
        return _fail(2, "config", exc)
    except ArithmeticError as exc:
        # a quadrature or series that did not converge fails the run like an assertion
        return _fail(1, "numerical", exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
