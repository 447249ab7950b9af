"""Experiment orchestration: configs, recovery sweeps, and benchmarks.

A sweep measures recovery error as a function of the received sample count M
for several projection-matrix families on one fixed signal.  Each (kind, M,
trial) cell draws a fresh projection and a fresh loss pattern from seeds
derived off the master seed, so any row can be replayed in isolation and a
rerun of the whole sweep is byte-identical.
"""

import os
import time
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channel import ExactCount, transmit
from .errors import ConfigError
from .projections import (
    ProjectionKind,
    ProjectionMatrix,
    SparseLayout,
    build_baseline_matrix,
    build_sparse_gaussian,
    project,
)
from .recovery import (
    RecoveryResult,
    SolverKind,
    SolverParams,
    recover_signal,
    recovery_error,
)
from .seeding import derived_seed
from .signals import (
    BasisKind,
    Signal,
    SparsifyingBasis,
    load_signal_csv,
    synthesize_sparse_signal,
)

SWEEP_CSV_SCHEMA_VERSION = 1
SWEEP_CSV_HEADER = "kind,M,trial,relative_error,solver,seed"
BENCH_CSV_HEADER = "kind,N,mean_ns,bytes"
SEED_ENV_VAR = "CSCOLLECT_SEED"

_DEFAULT_KINDS = (
    ProjectionKind.SPARSE_GAUSSIAN,
    ProjectionKind.DENSE_GAUSSIAN,
    ProjectionKind.BERNOULLI,
    ProjectionKind.TOEPLITZ,
    ProjectionKind.PARTIAL_BASIS,
)
_PACKET_KINDS = (ProjectionKind.SPARSE_GAUSSIAN, ProjectionKind.PARTIAL_BASIS)
_BENCH_KINDS = (
    ProjectionKind.SPARSE_GAUSSIAN,
    ProjectionKind.DENSE_GAUSSIAN,
    ProjectionKind.BERNOULLI,
)

# partial-basis rows are drawn from this basis in sweeps; with a
# frequency-ordered basis a lost packet removes one contiguous band
_SWEEP_PARTIAL_BASIS = BasisKind.FOURIER


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated sweep parameters; construction errors name the config key."""

    n: int
    source_count: Optional[int] = None
    signal_kind: str = "synthetic"
    signal_path: Optional[str] = None
    signal_column: int = 0
    signal_offset: int = 0
    signal_sparsity: Optional[int] = None
    signal_range: Tuple[float, float] = (-1.0, 1.0)
    basis: BasisKind = BasisKind.DCT
    kinds: Tuple[ProjectionKind, ...] = _DEFAULT_KINDS
    density: float = 0.1
    variance: float = 1.0
    layout: SparseLayout = SparseLayout.RANDOM
    m_values: Tuple[int, ...] = tuple(range(64, 385, 32))
    packet_length: int = 1
    trials: int = 20
    solver: SolverKind = SolverKind.OMP
    max_sparsity: Optional[int] = None
    residual_tol: float = 1e-6
    master_seed: int = 0
    out: str = "sweep.csv"

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("N", "must be a positive integer")
        ms = self.effective_source_count
        if ms < 1 or ms > self.n * 4:
            raise ConfigError("Ms", f"implausible sent-sample count {ms}")
        if self.signal_kind not in ("synthetic", "csv"):
            raise ConfigError("signal", f"unknown source {self.signal_kind!r}")
        if self.signal_kind == "csv" and not self.signal_path:
            raise ConfigError("signal_path", "required when signal = csv")
        if self.signal_sparsity is not None and not (
                1 <= self.signal_sparsity < self.n):
            raise ConfigError("signal_sparsity", f"need 1 <= K < N={self.n}")
        lo, hi = self.signal_range
        if not lo < hi:
            raise ConfigError("signal_range", f"need lo < hi, got {lo}:{hi}")
        if not self.kinds:
            raise ConfigError("kinds", "at least one matrix kind required")
        if not 0.0 < self.density <= 1.0:
            raise ConfigError("density", f"must lie in (0, 1], got {self.density}")
        if self.variance <= 0.0:
            raise ConfigError("variance", "must be positive")
        if not self.m_values:
            raise ConfigError("M", "at least one M value required")
        if any(m < 1 or m > ms for m in self.m_values):
            raise ConfigError("M", f"every M must lie in [1, {ms}]")
        if self.packet_length < 1:
            raise ConfigError("L", "must be >= 1")
        if ms % self.packet_length != 0:
            raise ConfigError("L", f"{self.packet_length} does not divide {ms}")
        if any(m % self.packet_length for m in self.m_values):
            raise ConfigError("M", "every M must be a multiple of L")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if self.max_sparsity is not None and self.max_sparsity < 0:
            raise ConfigError("max_sparsity", "must be >= 0")
        if self.residual_tol < 0:
            raise ConfigError("residual_tol", "must be >= 0")
        if self.master_seed < 0:
            raise ConfigError("seed", "must be a nonnegative integer")

    @property
    def effective_source_count(self) -> int:
        return self.n if self.source_count is None else self.source_count

    @property
    def effective_sparsity(self) -> int:
        if self.signal_sparsity is not None:
            return self.signal_sparsity
        return max(1, self.n // 20)


@dataclass(frozen=True)
class SweepRow:
    """One recovery trial; wall time is diagnostic only and never serialized."""

    matrix_kind: str
    m: int
    trial_index: int
    relative_error: float
    solver: str
    seed: int
    wall_time_ms: float = field(compare=False, default=0.0)


@dataclass(frozen=True)
class BenchRow:
    """Construction cost of one matrix kind at one size."""

    kind: str
    n: int
    duration_ns: int
    storage_bytes: int


def load_config_signal(cfg: ExperimentConfig) -> Signal:
    """The sweep's fixed input signal (one per config, shared by all trials)."""
    if cfg.signal_kind == "csv":
        return load_signal_csv(cfg.signal_path, column=cfg.signal_column,
                               offset=cfg.signal_offset, length=cfg.n)
    basis = SparsifyingBasis(kind=cfg.basis, dimension=cfg.n)
    sig, _ = synthesize_sparse_signal(
        cfg.n, cfg.effective_sparsity, basis,
        value_range=cfg.signal_range,
        seed=int(derived_seed(cfg.master_seed, "signal")))
    return sig


def _build_projection(cfg: ExperimentConfig, kind: ProjectionKind,
                      seed: int) -> ProjectionMatrix:
    rows = cfg.effective_source_count
    if kind is ProjectionKind.SPARSE_GAUSSIAN:
        return build_sparse_gaussian(rows, cfg.n, cfg.density,
                                     variance=cfg.variance,
                                     layout=cfg.layout, seed=seed)
    if kind is ProjectionKind.PARTIAL_BASIS:
        row_basis = SparsifyingBasis(kind=_SWEEP_PARTIAL_BASIS,
                                     dimension=cfg.n)
        return build_baseline_matrix(kind, rows, cfg.n, seed=seed,
                                     basis=row_basis)
    return build_baseline_matrix(kind, rows, cfg.n, seed=seed)


def run_single_trial(cfg: ExperimentConfig, kind: ProjectionKind, m: int,
                     trial: int, signal: Optional[Signal] = None) -> SweepRow:
    """Replay one sweep cell; the row only depends on (config, kind, M, trial)."""
    if signal is None:
        signal = load_config_signal(cfg)
    t0 = time.perf_counter()
    matrix_seed = int(derived_seed(cfg.master_seed, kind.value, m, trial,
                                   "matrix"))
    channel_seed = int(derived_seed(cfg.master_seed, kind.value, m, trial,
                                    "channel"))
    projection = _build_projection(cfg, kind, matrix_seed)
    sent = project(projection, signal)
    outcome = transmit(sent, ExactCount(m), packet_length=cfg.packet_length,
                       seed=channel_seed)
    basis = SparsifyingBasis(kind=cfg.basis, dimension=cfg.n)
    result = recover_signal(
        outcome, projection, basis, solver=cfg.solver,
        params=SolverParams(residual_tol=cfg.residual_tol,
                            max_sparsity=cfg.max_sparsity))
    err = recovery_error(signal, result.signal)
    elapsed_ms = (time.perf_counter() - t0) * 1e3
    return SweepRow(matrix_kind=kind.value, m=m, trial_index=trial,
                    relative_error=err, solver=cfg.solver.value,
                    seed=int(derived_seed(cfg.master_seed, kind.value, m,
                                          trial)),
                    wall_time_ms=elapsed_ms)


def run_recovery_sweep(cfg: ExperimentConfig) -> List[SweepRow]:
    """Full (kind x M x trial) sweep, rows sorted by (kind, M, trial)."""
    signal = load_config_signal(cfg)
    rows = [run_single_trial(cfg, kind, m, trial, signal=signal)
            for kind in cfg.kinds
            for m in cfg.m_values
            for trial in range(cfg.trials)]
    rows.sort(key=lambda r: (r.matrix_kind, r.m, r.trial_index))
    return rows


def run_packet_experiment(cfg: ExperimentConfig) -> List[SweepRow]:
    """Block-loss sweep narrowed to the two kinds the comparison is about."""
    kinds = tuple(k for k in cfg.kinds if k in _PACKET_KINDS)
    if not kinds:
        raise ConfigError("kinds", "packet experiment needs sparse_gaussian "
                                   "or partial_basis")
    return run_recovery_sweep(replace(cfg, kinds=kinds))


def run_canonical_sparse_experiment(
    n: int,
    k: int,
    m: int,
    seed: int = 0,
    density: float = 0.2,
    solver: SolverKind = SolverKind.BP,
) -> Tuple[RecoveryResult, RecoveryResult]:
    """One K-sparse canonical-basis trial for sparse-Gaussian vs partial-basis.

    The partial-basis projection is built from the canonical basis here, so
    it degenerates to plain sample selection; the returned pair is
    (sparse_gaussian_result, partial_basis_result) with relative errors
    filled in.  With a canonical basis the effective sensing matrix stays
    sparse, so the defaults lean on basis pursuit and a higher density than
    the sweep default; greedy recovery is unreliable in this regime.
    """
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= K < N, got K={k}, N={n}")
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= M <= N, got M={m}")
    basis = SparsifyingBasis(kind=BasisKind.CANONICAL, dimension=n)
    signal, _ = synthesize_sparse_signal(
        n, k, basis, seed=int(derived_seed(seed, "signal")))
    results = []
    for kind in (ProjectionKind.SPARSE_GAUSSIAN, ProjectionKind.PARTIAL_BASIS):
        matrix_seed = int(derived_seed(seed, kind.value, "matrix"))
        if kind is ProjectionKind.SPARSE_GAUSSIAN:
            projection = build_sparse_gaussian(n, n, density, seed=matrix_seed)
        else:
            projection = build_baseline_matrix(kind, n, n, seed=matrix_seed,
                                               basis=basis)
        outcome = transmit(project(projection, signal), ExactCount(m),
                           seed=int(derived_seed(seed, kind.value, "channel")))
        result = recover_signal(outcome, projection, basis, solver=solver)
        results.append(result.with_error(recovery_error(signal,
                                                        result.signal)))
    return results[0], results[1]


def run_construction_benchmark(
    n_values: Sequence[int],
    density: float = 0.1,
    trials: int = 5,
    kinds: Sequence[ProjectionKind] = _BENCH_KINDS,
    seed: int = 0,
) -> List[BenchRow]:
    """Median wall-clock construction time and storage bytes per kind and N.

    One warm-up build per cell is discarded before timing.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = []
    for kind in kinds:
        for n in n_values:
            def build(s):
                if kind is ProjectionKind.SPARSE_GAUSSIAN:
                    return build_sparse_gaussian(n, n, density, seed=s)
                return build_baseline_matrix(kind, n, n, seed=s)
            built = build(seed)  # warm-up
            times = []
            for t in range(trials):
                t0 = time.perf_counter_ns()
                built = build(seed + 1 + t)
                times.append(time.perf_counter_ns() - t0)
            times.sort()
            mid = len(times) // 2
            median = (times[mid] if len(times) % 2
                      else (times[mid - 1] + times[mid]) // 2)
            rows.append(BenchRow(kind=kind.value, n=n, duration_ns=int(median),
                                 storage_bytes=built.storage_bytes()))
    return rows


def sweep_csv_lines(rows: Sequence[SweepRow]) -> List[str]:
    """Header plus one line per row, sorted for byte stability."""
    ordered = sorted(rows, key=lambda r: (r.matrix_kind, r.m, r.trial_index))
    lines = [SWEEP_CSV_HEADER]
    for r in ordered:
        lines.append(f"{r.matrix_kind},{r.m},{r.trial_index},"
                     f"{float(r.relative_error)!r},{r.solver},{r.seed}")
    return lines


def write_sweep_csv(rows: Sequence[SweepRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(sweep_csv_lines(rows)) + "\n")


def bench_csv_lines(rows: Sequence[BenchRow]) -> List[str]:
    lines = [BENCH_CSV_HEADER]
    for r in rows:
        lines.append(f"{r.kind},{r.n},{r.duration_ns},{r.storage_bytes}")
    return lines


def write_bench_csv(rows: Sequence[BenchRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(bench_csv_lines(rows)) + "\n")


def mean_errors(rows: Sequence[SweepRow]) -> Dict[Tuple[str, int], float]:
    """Mean relative error per (kind, M); the reported sweep statistic."""
    sums: Dict[Tuple[str, int], List[float]] = {}
    for r in rows:
        sums.setdefault((r.matrix_kind, r.m), []).append(r.relative_error)
    return {key: float(np.mean(v)) for key, v in sums.items()}


_KIND_ALIASES = {k.value: k for k in ProjectionKind}
_LAYOUT_ALIASES = {l.value: l for l in SparseLayout}
_BASIS_ALIASES = {b.value: b for b in BasisKind}
_SOLVER_ALIASES = {s.value: s for s in SolverKind}

_CONFIG_KEYS = (
    "N", "Ms", "signal", "signal_path", "signal_column", "signal_offset",
    "signal_sparsity", "signal_range", "basis", "kinds", "density",
    "variance", "layout", "M", "L", "trials", "solver", "max_sparsity",
    "residual_tol", "seed", "out",
)


def expand_m_values(text: str) -> Tuple[int, ...]:
    """Parse an M specification: '64:384:32' range, '64,96' list, or '64'."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step < 1 or stop < start:
                raise ValueError
            return tuple(range(start, stop + 1, step))
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ConfigError("M", f"cannot parse M specification {text!r}")


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}")


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {text!r}")


def _parse_enum(key: str, text: str, aliases):
    try:
        return aliases[text.strip()]
    except KeyError:
        raise ConfigError(key, f"unknown value {text!r}; "
                               f"choose from {sorted(aliases)}")


def read_config_entries(path: str) -> Dict[str, str]:
    """Raw `key = value` entries from a config file, comments stripped."""
    entries: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError("file",
                                  f"line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
    return entries


def parse_config(
    path: Optional[str] = None,
    overrides: Optional[Dict[str, str]] = None,
    env: Optional[Dict[str, str]] = None,
) -> ExperimentConfig:
    """Build a config from a flat `key = value` file plus CLI overrides.

    Precedence for the master seed: --seed flag, then the CSCOLLECT_SEED
    environment variable, then the file, then 0.  All other keys: flag over
    file over default.
    """
    entries = {} if path is None else read_config_entries(path)
    env = os.environ if env is None else env
    if SEED_ENV_VAR in env:
        entries["seed"] = env[SEED_ENV_VAR]
    for key, value in (overrides or {}).items():
        entries[key] = value
    for key in entries:
        if key not in _CONFIG_KEYS:
            raise ConfigError(key, "unknown configuration key")

    kwargs = {}
    if "N" not in entries:
        raise ConfigError("N", "required")
    kwargs["n"] = _parse_int("N", entries["N"])
    if "Ms" in entries:
        kwargs["source_count"] = _parse_int("Ms", entries["Ms"])
    if "signal" in entries:
        kwargs["signal_kind"] = entries["signal"]
    if "signal_path" in entries:
        kwargs["signal_path"] = entries["signal_path"]
    if "signal_column" in entries:
        kwargs["signal_column"] = _parse_int("signal_column",
                                             entries["signal_column"])
    if "signal_offset" in entries:
        kwargs["signal_offset"] = _parse_int("signal_offset",
                                             entries["signal_offset"])
    if "signal_sparsity" in entries:
        kwargs["signal_sparsity"] = _parse_int("signal_sparsity",
                                               entries["signal_sparsity"])
    if "signal_range" in entries:
        text = entries["signal_range"]
        parts = text.split(":")
        if len(parts) != 2:
            raise ConfigError("signal_range", f"expected lo:hi, got {text!r}")
        kwargs["signal_range"] = (_parse_float("signal_range", parts[0]),
                                  _parse_float("signal_range", parts[1]))
    if "basis" in entries:
        kwargs["basis"] = _parse_enum("basis", entries["basis"],
                                      _BASIS_ALIASES)
    if "kinds" in entries:
        kwargs["kinds"] = tuple(
            _parse_enum("kinds", part, _KIND_ALIASES)
            for part in entries["kinds"].split(","))
    if "density" in entries:
        kwargs["density"] = _parse_float("density", entries["density"])
    if "variance" in entries:
        kwargs["variance"] = _parse_float("variance", entries["variance"])
    if "layout" in entries:
        kwargs["layout"] = _parse_enum("layout", entries["layout"],
                                       _LAYOUT_ALIASES)
    if "M" in entries:
        kwargs["m_values"] = expand_m_values(entries["M"])
    if "L" in entries:
        kwargs["packet_length"] = _parse_int("L", entries["L"])
    if "trials" in entries:
        kwargs["trials"] = _parse_int("trials", entries["trials"])
    if "solver" in entries:
        kwargs["solver"] = _parse_enum("solver", entries["solver"],
                                       _SOLVER_ALIASES)
    if "max_sparsity" in entries:
        kwargs["max_sparsity"] = _parse_int("max_sparsity",
                                            entries["max_sparsity"])
    if "residual_tol" in entries:
        kwargs["residual_tol"] = _parse_float("residual_tol",
                                              entries["residual_tol"])
    if "seed" in entries:
        kwargs["master_seed"] = _parse_int("seed", entries["seed"])
    if "out" in entries:
        kwargs["out"] = entries["out"]
    return ExperimentConfig(**kwargs)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Flat `key = value` text that parse_config reads back equal."""
    lines = [f"N = {cfg.n}"]
    if cfg.source_count is not None:
        lines.append(f"Ms = {cfg.source_count}")
    lines.append(f"signal = {cfg.signal_kind}")
    if cfg.signal_path is not None:
        lines.append(f"signal_path = {cfg.signal_path}")
    lines.append(f"signal_column = {cfg.signal_column}")
    lines.append(f"signal_offset = {cfg.signal_offset}")
    if cfg.signal_sparsity is not None:
        lines.append(f"signal_sparsity = {cfg.signal_sparsity}")
    lines.append(f"signal_range = {float(cfg.signal_range[0])!r}:"
                 f"{float(cfg.signal_range[1])!r}")
    lines.append(f"basis = {cfg.basis.value}")
    lines.append("kinds = " + ",".join(k.value for k in cfg.kinds))
    lines.append(f"density = {float(cfg.density)!r}")
    lines.append(f"variance = {float(cfg.variance)!r}")
    lines.append(f"layout = {cfg.layout.value}")
    lines.append("M = " + ",".join(str(m) for m in cfg.m_values))
    lines.append(f"L = {cfg.packet_length}")
    lines.append(f"trials = {cfg.trials}")
    lines.append(f"solver = {cfg.solver.value}")
    if cfg.max_sparsity is not None:
        lines.append(f"max_sparsity = {cfg.max_sparsity}")
    lines.append(f"residual_tol = {float(cfg.residual_tol)!r}")
    lines.append(f"seed = {cfg.master_seed}")
    lines.append(f"out = {cfg.out}")
    return "\n".join(lines) + "\n"
