"""Monte Carlo benchmark harness.

Every (users, antennas, snr) cell is run for a number of channel
realizations.  Within a realization all algorithms see the same channel and
the same per-restart starting precoders, so comparisons are paired.  All
randomness derives from the master seed and the cell/realization indices,
so the output does not depend on execution order or on the number of
worker processes.
"""

import csv
import dataclasses
import hashlib
import io
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive
from .baselines import adam_solve, gd_solve
from .exceptions import ConfigurationError, NumericDomainError, SolverError
from .lagd import REPORT_MODES, LagdConfig, initial_precoder, lagd_solve, multistart
from .model import SystemConfig, sample_channel
from .network import ENCODINGS, format_arch, parse_arch
from .wmmse import wmmse_solve

ALGORITHMS = ("lagd", "wmmse", "gd", "adam")
RAW_FIELDS = ("algo", "users", "antennas", "snr_db", "realization", "restart_best",
              "wsr", "wall_ms", "seed", "channel_hash")
AGGREGATE_FIELDS = ("algo", "users", "antennas", "snr_db", "mean_wsr", "var_wsr",
                    "mean_wall_ms", "n")
FAILURE_THRESHOLD = 0.01

# errors a single solve may raise without invalidating the whole sweep
SOLVER_ERRORS = (SolverError, NumericDomainError, FloatingPointError, np.linalg.LinAlgError)


@dataclass
class ExperimentSpec:
    """Definition of a benchmark sweep.

    ``timing`` controls whether wall-clock times are recorded.  It is off by
    default because measured times would make repeated runs differ.
    """

    algorithms: tuple = ("lagd", "wmmse")
    users: tuple = (4,)
    antennas: tuple = (4,)
    snr_db: tuple = (10.0,)
    realizations: int = 100
    restarts: int = 10
    iters_lagd: int = 500
    iters_wmmse: int = 50
    iters_gd: int = 500
    iters_adam: int = 500
    gd_step: float = 1e-2
    adam_lr: float = 1e-2
    arch: tuple = (40, 40)
    theta_lr: float = 1e-4
    encoding: str = "flat"
    report_mode: str = "final"
    seed: int = 0
    timing: bool = False

    def __post_init__(self):
        self.algorithms = tuple(self.algorithms)
        self.users = tuple(int(n) for n in self.users)
        self.antennas = tuple(int(m) for m in self.antennas)
        self.snr_db = tuple(float(s) for s in self.snr_db)
        self.arch = parse_arch(self.arch)
        for name in ("algorithms", "users", "antennas", "snr_db"):
            if not getattr(self, name):
                raise ConfigurationError(f"{name} must be non-empty")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ConfigurationError(f"unknown algorithms {sorted(unknown)}; choose from {ALGORITHMS}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigurationError("algorithms must not repeat")
        for n in self.users + self.antennas:
            check_positive(n, "users/antennas", integer=True)
        if not all(np.isfinite(self.snr_db)):
            raise ConfigurationError("snr_db values must be finite")
        check_positive(self.realizations, "realizations", integer=True)
        check_positive(self.restarts, "restarts", integer=True)
        for name in ("iters_lagd", "iters_wmmse", "iters_gd", "iters_adam"):
            check_positive(getattr(self, name), name, integer=True, allow_zero=True)
        for name in ("gd_step", "adam_lr", "theta_lr"):
            check_positive(getattr(self, name), name)
        check_positive(self.seed, "seed", integer=True, allow_zero=True)
        if self.report_mode not in REPORT_MODES:
            raise ConfigurationError(f"report_mode must be one of {REPORT_MODES}")
        if self.encoding not in ENCODINGS:
            raise ConfigurationError(f"encoding must be one of {ENCODINGS}")

    def cells(self):
        """All (users, antennas, snr_db) combinations in sweep order."""
        return list(itertools.product(self.users, self.antennas, self.snr_db))

    def to_dict(self):
        d = dataclasses.asdict(self)
        for key, value in d.items():
            if isinstance(value, tuple):
                d[key] = list(value)
        d["arch"] = format_arch(self.arch)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class RawRecord:
    algo: str
    users: int
    antennas: int
    snr_db: float
    realization: int
    restart_best: int
    wsr: float
    wall_ms: float
    seed: int
    channel_hash: str
    error: str = None

    @property
    def failed(self):
        return self.error is not None


@dataclass
class AggregateRow:
    """Per-cell statistics over the successful realizations of one algorithm."""

    algo: str
    users: int
    antennas: int
    snr_db: float
    mean_wsr: float
    var_wsr: float
    mean_wall_ms: float
    n: int
    failures: int = 0
    seed: int = 0


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    records: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    @property
    def n_failed(self):
        return sum(r.failed for r in self.records)

    @property
    def failure_rate(self):
        return self.n_failed / len(self.records) if self.records else 0.0


def _snr_code(snr_db):
    # SeedSequence entropy must be non-negative; fold the sign in
    milli = int(round(snr_db * 1000))
    return 2 * milli if milli >= 0 else -2 * milli - 1


def realization_seed(master_seed, users, antennas, snr_db, realization):
    """Integer seed of one realization of one cell."""
    ss = np.random.SeedSequence([master_seed, users, antennas, _snr_code(snr_db), realization])
    return int(ss.generate_state(1, np.uint64)[0])


def realization_streams(seed):
    """``(channel_rng, restart_seed)`` for a realization seed.

    The channel comes from the first child; the second child is the master
    seed of the multistart wrapper, shared by all algorithms.
    """
    channel_ss, solver_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(channel_ss), solver_ss


def channel_hash(H):
    return hashlib.sha256(np.ascontiguousarray(H, dtype=np.complex128).tobytes()).hexdigest()[:16]


def make_solver(spec, algo, config, H):
    """A function ``restart_seed -> RunResult`` for one algorithm and channel."""
    if algo == "lagd":
        cfg = LagdConfig(iters=spec.iters_lagd, theta_lr=spec.theta_lr, restarts=spec.restarts,
                         hidden=spec.arch, report_mode=spec.report_mode, encoding=spec.encoding)
        return lambda ss: lagd_solve(config, H, cfg, ss)
    if algo == "wmmse":
        return lambda ss: wmmse_solve(config, H, initial_precoder(config, ss), spec.iters_wmmse)
    if algo == "gd":
        return lambda ss: gd_solve(config, H, initial_precoder(config, ss), spec.iters_gd,
                                   spec.gd_step)
    if algo == "adam":
        return lambda ss: adam_solve(config, H, initial_precoder(config, ss), spec.iters_adam,
                                     lr=spec.adam_lr)
    raise ConfigurationError(f"unknown algorithm {algo!r}")


def solve_realization(spec, users, antennas, snr_db, realization, algorithms=None):
    """Run every algorithm on one realization.

    Returns a list of ``(RawRecord, RunResult or None)`` in algorithm order.
    """
    seed = realization_seed(spec.seed, users, antennas, snr_db, realization)
    config = SystemConfig.from_snr(users, antennas, snr_db)
    channel_rng, solver_ss = realization_streams(seed)
    H = sample_channel(config, channel_rng)
    digest = channel_hash(H)
    out = []
    for algo in algorithms or spec.algorithms:
        solve = make_solver(spec, algo, config, H)
        try:
            result = multistart(solve, solver_ss, spec.restarts, spec.report_mode)
        except SOLVER_ERRORS as exc:
            record = RawRecord(algo, users, antennas, snr_db, realization, -1, None, None,
                               seed, digest, error=f"{type(exc).__name__}: {exc}")
            out.append((record, None))
            continue
        wall_ms = 1000.0 * result.wall_time if spec.timing else None
        record = RawRecord(algo, users, antennas, snr_db, realization, result.restart,
                           result.reported_wsr, wall_ms, seed, digest)
        out.append((record, result))
    return out


def _realization_task(args):
    spec, cell, r = args
    return [record for record, _ in solve_realization(spec, *cell, r)]


def aggregate(spec, records):
    rows = []
    for algo in spec.algorithms:
        for cell in spec.cells():
            group = [r for r in records if r.algo == algo and (r.users, r.antennas, r.snr_db) == cell]
            ok = [r for r in group if not r.failed]
            values = np.array([r.wsr for r in ok])
            if len(ok):
                mean, var = float(np.mean(values)), float(np.var(values))
            else:
                mean = var = float("nan")
            wall = None
            if spec.timing and ok:
                wall = float(np.mean([r.wall_ms for r in ok]))
            rows.append(AggregateRow(algo, *cell, mean_wsr=mean, var_wsr=var, mean_wall_ms=wall,
                                     n=len(ok), failures=len(group) - len(ok), seed=spec.seed))
    return rows


def run_experiment(spec, jobs=1, progress=None):
    """Run the sweep and return raw records plus per-cell aggregates.

    Parameters
    ----------
    spec : ExperimentSpec
    jobs : int
        Worker processes; the output is identical for any value.
    progress : callable, optional
        Called with ``(done, total)`` after each realization.
    """
    check_positive(jobs, "jobs", integer=True)
    tasks = [(spec, cell, r) for cell in spec.cells() for r in range(spec.realizations)]
    records = []
    if jobs == 1:
        results = map(_realization_task, tasks)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=jobs)
        results = pool.map(_realization_task, tasks)
    try:
        for done, chunk in enumerate(results, 1):
            records.extend(chunk)
            if progress is not None:
                progress(done, len(tasks))
    finally:
        if pool is not None:
            pool.shutdown()
    return ExperimentResult(spec, records, aggregate(spec, records))


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_text(fields, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(getattr(row, f)) for f in fields])
    return buf.getvalue()


def raw_csv(records):
    return _csv_text(RAW_FIELDS, records)


def aggregate_csv(rows):
    return _csv_text(AGGREGATE_FIELDS, rows)


def to_json(result):
    """JSON document with the experiment settings, raw records and aggregates."""
    doc = {
        "spec": result.spec.to_dict(),
        "failures": result.n_failed,
        "raw": [dataclasses.asdict(r) for r in result.records],
        "aggregate": [dataclasses.asdict(r) for r in result.rows],
    }
    return json.dumps(doc, indent=1, allow_nan=True) + "\n"


def emit_results(result, fmt, out):
    """Write results under directory ``out``; returns the written paths.

    ``csv`` writes ``raw.csv`` and ``aggregate.csv``; ``json`` writes
    ``results.json``.  Raises ``OSError`` when the directory is unwritable.
    """
    if not result.rows:
        raise ValueError("no aggregate rows to emit")
    os.makedirs(out, exist_ok=True)
    if fmt == "csv":
        files = {"raw.csv": raw_csv(result.records), "aggregate.csv": aggregate_csv(result.rows)}
    elif fmt == "json":
        files = {"results.json": to_json(result)}
    else:
        raise ConfigurationError(f"unknown format {fmt!r}")
    paths = []
    for name, text in files.items():
        path = os.path.join(out, name)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        paths.append(path)
    return paths


def run_trace(spec):
    """Per-iteration trace of one algorithm on realization 0 of a single cell.

    Returns the :class:`RunResult` of the best restart.  The realization is
    the same one ``run_experiment`` would produce for this spec.
    """
    if len(spec.algorithms) != 1 or len(spec.cells()) != 1 or spec.realizations != 1:
        raise ConfigurationError("trace needs exactly one algorithm, one cell and one realization")
    (record, result), = solve_realization(spec, *spec.cells()[0], 0)
    if record.failed:
        raise SolverError(record.error)
    return result


def trace_csv(result):
    """``iter,wsr`` CSV; WMMSE runs add their weighted sum-MSE objective column."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    has_objective = result.objective_trace is not None
    writer.writerow(["iter", "wsr", "objective"] if has_objective else ["iter", "wsr"])
    for k, value in enumerate(result.wsr_trace):
        row = [k, repr(float(value))]
        if has_objective:
            obj = result.objective_trace[k]
            row.append("" if np.isnan(obj) else repr(float(obj)))
        writer.writerow(row)
    return buf.getvalue()
