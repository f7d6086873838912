"""Monte-Carlo harness: sweep estimator/parameter grids over seeded trials
and summarize relative-error distributions per grid point.

An experiment fixes a sequence source and a mode, then crosses estimators,
k values, substitution rates, and (in read mode) sequencer error rates and
coverages. Each grid point runs ``trials_per_point`` trials; trials cycle
round-robin over the references, and the reference index is recorded so
pooled statistics can be regrouped later. Relative error e = p_raw / p - 1
uses the raw, unclamped estimate so edge bias stays visible. Trials where
an estimator is undefined (singular denominator, no root, empty retained
set) stay in the output with an error code instead of disappearing.

Reproducibility: every seed is derived by hashing the master seed, the grid
point, and the trial index, so runs are stable under grid reordering and
independent of execution order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import MutrateError
from .estimators import (
    EstimateResult,
    EstimatorId,
    READ_BASED,
    SubsetSpec,
    estimate_general_k,
    estimate_k1_gc,
    estimate_k1_reads,
    estimate_k1_single,
    estimate_large_k_reads,
    estimate_large_k_seq,
)
from .kmers import KmerTable, MAX_K, count_kmers_reads, count_kmers_sequence
from .model import (
    ALPHABET,
    CircularSequence,
    SubstitutionChannel,
    encode_base,
    generate_iid_sequence,
    mutate,
    sample_reads,
)
from .seqio import read_fasta

TRIALS_FORMAT = "mutrate-trials-v1"
SUMMARY_FORMAT = "mutrate-summary-v1"

DEFAULT_COVERAGE = 30.0
DEFAULT_READ_LEN = 1000

_ERROR_CODES = {
    "SingularDenominator": "singular-denominator",
    "NoRootInRange": "no-root-in-range",
    "EmptyRetainedSet": "empty-retained-set",
    "MismatchedK": "mismatched-k",
}


class Mode(str, Enum):
    """Which data the estimators see: complete k-mer statistics of both
    sequences, or only noisy reads of both."""

    NONSEQ = "nonseq"
    SEQ = "seq"


MODE_ESTIMATORS = {
    Mode.NONSEQ: frozenset(
        {EstimatorId.K1_SINGLE, EstimatorId.K1_GC, EstimatorId.GENERAL_K, EstimatorId.LARGE_K_SEQ}
    ),
    Mode.SEQ: READ_BASED,
}


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a tuple of printable parts."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def choose_k1_base(x: CircularSequence) -> str:
    """Base whose frequency deviates most from 1/4 (ties go to earlier
    alphabet order). The single-base estimators are undefined at exactly
    1/4 and noisiest near it, so pick the farthest base."""
    counts = np.bincount(x.codes, minlength=4)
    dev = np.abs(counts / len(x) - 0.25)
    return ALPHABET[int(np.argmax(dev))]


@dataclass(frozen=True)
class IidSource:
    """References drawn i.i.d. from a fixed 4-way symbol distribution."""

    length: int
    distribution: tuple[float, float, float, float]
    num_references: int = 1

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"length must be >= 1, got {self.length}")
        if self.num_references < 1:
            raise ValueError(f"num_references must be >= 1, got {self.num_references}")
        if len(self.distribution) != 4:
            raise ValueError("distribution must have 4 entries (A, C, G, T)")


@dataclass(frozen=True)
class FastaSource:
    """References loaded from a FASTA file, one per record."""

    path: str
    on_invalid: str = "error"


Source = Union[IidSource, FastaSource]


@dataclass(frozen=True)
class GridPoint:
    """One cell of the sweep. ``s`` and ``coverage`` are None outside read
    mode, where they do not apply."""

    estimator: EstimatorId
    k: int
    p: float
    s: float | None = None
    coverage: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    source: Source
    mode: Mode
    estimators: tuple[EstimatorId, ...]
    p_grid: tuple[float, ...]
    trials_per_point: int
    master_seed: int
    k_values: tuple[int, ...] = (1,)
    s_grid: tuple[float, ...] = (0.0,)
    coverage_grid: tuple[float, ...] = (DEFAULT_COVERAGE,)
    read_len: int = DEFAULT_READ_LEN
    k1_base: str = "auto"
    subset: SubsetSpec | None = None
    y_coverage: float | None = None
    y_read_len: int | None = None

    def __post_init__(self):
        mode = Mode(self.mode)
        object.__setattr__(self, "mode", mode)
        estimators = tuple(EstimatorId(e) for e in self.estimators)
        object.__setattr__(self, "estimators", estimators)
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        object.__setattr__(self, "s_grid", tuple(float(s) for s in self.s_grid))
        object.__setattr__(self, "coverage_grid", tuple(float(c) for c in self.coverage_grid))
        if not estimators:
            raise ValueError("estimators must be nonempty")
        allowed = MODE_ESTIMATORS[mode]
        bad = [e.value for e in estimators if e not in allowed]
        if bad:
            raise ValueError(f"estimators {bad} do not run in {mode.value} mode")
        if not self.p_grid:
            raise ValueError("p_grid must be nonempty")
        for p in self.p_grid:
            if not 0.0 < p < 1.0:
                raise ValueError(f"rates must be in (0, 1) for relative error, got {p}")
        if not self.k_values:
            raise ValueError("k_values must be nonempty")
        for k in self.k_values:
            if not 1 <= k <= MAX_K:
                raise ValueError(f"k must be in 1..{MAX_K}, got {k}")
        if self.trials_per_point < 1:
            raise ValueError(f"trials_per_point must be >= 1, got {self.trials_per_point}")
        if self.k1_base not in ("auto", "A", "C", "G", "T"):
            raise ValueError(f"k1_base must be 'auto' or one of ACGT, got {self.k1_base!r}")
        if self.subset is not None and EstimatorId.GENERAL_K not in estimators:
            raise ValueError("subset only applies to the general-k estimator")
        if mode is Mode.SEQ:
            if not self.s_grid:
                raise ValueError("read mode needs a nonempty s_grid")
            for s in self.s_grid:
                if not 0.0 <= s < 1.0:
                    raise ValueError(f"error rates must be in [0, 1), got {s}")
            if not self.coverage_grid:
                raise ValueError("read mode needs a nonempty coverage_grid")
            for c in self.coverage_grid:
                if c <= 0:
                    raise ValueError(f"coverages must be positive, got {c}")
            if self.read_len < max(self.k_values):
                raise ValueError(
                    f"read_len {self.read_len} shorter than largest k {max(self.k_values)}"
                )
        asym = self.y_coverage is not None or self.y_read_len is not None
        if asym and (mode is not Mode.SEQ or EstimatorId.LARGE_K_READS not in estimators):
            raise ValueError(
                "separate mutated-side read parameters only apply to large-k-reads"
            )
        if self.y_coverage is not None and self.y_coverage <= 0:
            raise ValueError(f"y_coverage must be positive, got {self.y_coverage}")
        if self.y_read_len is not None and self.y_read_len < max(self.k_values):
            raise ValueError("y_read_len must cover the largest k")

    def grid_points(self) -> Iterator[GridPoint]:
        """Deterministic sweep order: estimator, k, p, then (read mode) s
        and coverage."""
        for est in self.estimators:
            for k in self.k_values:
                for p in self.p_grid:
                    if self.mode is Mode.NONSEQ:
                        yield GridPoint(est, k, p)
                    else:
                        for s in self.s_grid:
                            for c in self.coverage_grid:
                                yield GridPoint(est, k, p, s, c)


@dataclass(frozen=True)
class TrialRecord:
    estimator: EstimatorId
    k: int
    p: float
    s: float | None
    coverage: float | None
    reference: int
    trial: int
    seed: int
    p_raw: float
    p_clamped: float
    rel_error: float
    error: str = ""
    lambda_threshold: int | None = None
    lambda_fallback: bool = False
    multiple_roots: bool = False

    @property
    def ok(self) -> bool:
        return self.error == ""

    @property
    def grid_point(self) -> GridPoint:
        return GridPoint(self.estimator, self.k, self.p, self.s, self.coverage)


@dataclass(frozen=True)
class BoxStats:
    """Box-plot summary of one grid point's relative errors.

    Quartiles use linear (midpoint) interpolation; whiskers sit on the most
    extreme observations within 1.5 IQR of the quartiles; ``stddev`` is the
    population standard deviation. Errored trials are excluded from every
    statistic and only counted.
    """

    count: int
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    mean: float
    stddev: float
    error_count: int = 0


def box_stats(values: Sequence[float], error_count: int = 0) -> BoxStats:
    vals = np.asarray([v for v in values if not math.isnan(v)], dtype=np.float64)
    if vals.size == 0:
        nan = float("nan")
        return BoxStats(0, nan, nan, nan, nan, nan, nan, nan, error_count)
    q1, med, q3 = (float(q) for q in np.quantile(vals, [0.25, 0.5, 0.75]))
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    return BoxStats(
        count=int(vals.size),
        median=med,
        q1=q1,
        q3=q3,
        whisker_low=float(vals[vals >= lo_fence].min()),
        whisker_high=float(vals[vals <= hi_fence].max()),
        mean=float(vals.mean()),
        stddev=float(vals.std()),
        error_count=error_count,
    )


def summarize(records: Sequence[TrialRecord]) -> dict[GridPoint, BoxStats]:
    """Per-grid-point box statistics, keyed in first-appearance order."""
    groups: dict[GridPoint, list[float]] = {}
    errors: dict[GridPoint, int] = {}
    for r in records:
        gp = r.grid_point
        groups.setdefault(gp, [])
        errors.setdefault(gp, 0)
        if r.ok:
            groups[gp].append(r.rel_error)
        else:
            errors[gp] += 1
    return {gp: box_stats(vals, errors[gp]) for gp, vals in groups.items()}


class _SeedBook:
    """Hands out derived seeds and insists they never collide."""

    def __init__(self, master: int):
        self.master = master
        self._used: dict[int, tuple] = {}

    def seed(self, *parts) -> int:
        key = (self.master,) + parts
        s = derive_seed(*key)
        prev = self._used.get(s)
        if prev is not None and prev != key:
            raise RuntimeError(f"seed collision between {prev} and {key}")
        self._used[s] = key
        return s


@dataclass
class _Reference:
    index: int
    x: CircularSequence
    base: str
    x_tables: dict[int, KmerTable] = field(default_factory=dict)

    def table(self, k: int) -> KmerTable:
        if k not in self.x_tables:
            self.x_tables[k] = count_kmers_sequence(self.x, k)
        return self.x_tables[k]


def _load_references(config: ExperimentConfig, seeds: _SeedBook) -> list[_Reference]:
    src = config.source
    if isinstance(src, IidSource):
        xs = [
            generate_iid_sequence(src.length, src.distribution, seeds.seed("ref", i))
            for i in range(src.num_references)
        ]
    else:
        xs = [rec.seq for rec in read_fasta(src.path, src.on_invalid)]
    refs = []
    for i, x in enumerate(xs):
        if config.mode is Mode.SEQ and config.read_len > len(x):
            raise ValueError(f"reference {i}: read length exceeds sequence length {len(x)}")
        base = config.k1_base if config.k1_base != "auto" else choose_k1_base(x)
        refs.append(_Reference(i, x, base))
    return refs


def _num_reads(coverage: float, g: int, read_len: int) -> int:
    n = int(round(coverage * g / read_len))
    if n < 1:
        raise ValueError(
            f"coverage {coverage} at read length {read_len} on length {g} yields no reads"
        )
    return n


def _estimate_trial(
    config: ExperimentConfig,
    gp: GridPoint,
    ref: _Reference,
    y: CircularSequence,
    seeds: _SeedBook,
    trial_key: tuple,
) -> EstimateResult:
    x = ref.x
    est = gp.estimator
    if est is EstimatorId.K1_SINGLE:
        code = encode_base(ref.base)
        f = int(np.count_nonzero(x.codes == code))
        f_prime = int(np.count_nonzero(y.codes == code))
        return estimate_k1_single(f, f_prime, len(x))
    if est is EstimatorId.K1_GC:
        return estimate_k1_gc(x.gc_fraction(), y.gc_fraction())
    if est in (EstimatorId.GENERAL_K, EstimatorId.LARGE_K_SEQ):
        x_table = ref.table(gp.k)
        y_table = count_kmers_sequence(y, gp.k)
        if est is EstimatorId.GENERAL_K:
            return estimate_general_k(x_table, y_table, config.subset)
        return estimate_large_k_seq(x_table, y_table)
    # read mode: fresh reads of both sides every trial
    g = len(x)
    channel = SubstitutionChannel(gp.s)
    y_len = config.y_read_len if config.y_read_len is not None else config.read_len
    y_cov = config.y_coverage if config.y_coverage is not None else gp.coverage
    n = _num_reads(gp.coverage, g, config.read_len)
    y_n = _num_reads(y_cov, g, y_len)
    xr = sample_reads(x, config.read_len, n, channel, seeds.seed(*trial_key, "xreads"))
    yr = sample_reads(y, y_len, y_n, channel, seeds.seed(*trial_key, "yreads"))
    if est is EstimatorId.K1_READS:
        code = encode_base(ref.base)
        h = int(np.count_nonzero(xr.matrix == code))
        h_prime = int(np.count_nonzero(yr.matrix == code))
        return estimate_k1_reads(h, h_prime, n, config.read_len)
    k = gp.k
    hx = count_kmers_reads(xr, k)
    hy = count_kmers_reads(yr, k)
    scale = (n * (config.read_len - k + 1)) / (y_n * (y_len - k + 1))
    return estimate_large_k_reads(hx, hy, gp.s, mutated_scale=scale)


def run_experiment(config: ExperimentConfig) -> list[TrialRecord]:
    """Run every trial of every grid point, in deterministic order.

    Per trial: the seed is derived from (master seed, grid point, trial
    index); the reference cycles round-robin; the reference is mutated at
    the grid point's rate and the grid point's estimator runs on whatever
    data its mode prescribes.
    """
    seeds = _SeedBook(config.master_seed)
    refs = _load_references(config, seeds)
    records: list[TrialRecord] = []
    for gp in config.grid_points():
        channel = SubstitutionChannel(gp.p)
        gp_key = ("grid", gp.estimator.value, gp.k, gp.p, gp.s, gp.coverage)
        for trial in range(config.trials_per_point):
            ref = refs[trial % len(refs)]
            trial_key = gp_key + (trial,)
            trial_seed = seeds.seed(*trial_key)
            y = mutate(ref.x, channel, seeds.seed(*trial_key, "mutate"))
            try:
                res = _estimate_trial(config, gp, ref, y, seeds, trial_key)
            except MutrateError as exc:
                code = _ERROR_CODES.get(type(exc).__name__, "estimator-error")
                nan = float("nan")
                records.append(
                    TrialRecord(
                        gp.estimator, gp.k, gp.p, gp.s, gp.coverage,
                        ref.index, trial, trial_seed, nan, nan, nan, code,
                    )
                )
                continue
            records.append(
                TrialRecord(
                    estimator=gp.estimator,
                    k=gp.k,
                    p=gp.p,
                    s=gp.s,
                    coverage=gp.coverage,
                    reference=ref.index,
                    trial=trial,
                    seed=trial_seed,
                    p_raw=res.p_raw,
                    p_clamped=res.p_clamped,
                    rel_error=res.p_raw / gp.p - 1.0,
                    error="",
                    lambda_threshold=res.diagnostics.lambda_threshold,
                    lambda_fallback=res.diagnostics.lambda_fallback,
                    multiple_roots=res.diagnostics.multiple_roots,
                )
            )
    return records


# --- serialization -----------------------------------------------------------

_CSV_COLUMNS = [
    "estimator",
    "k",
    "p",
    "s",
    "coverage",
    "reference",
    "trial",
    "seed",
    "p_raw",
    "p_clamped",
    "rel_error",
    "error",
    "lambda_threshold",
    "lambda_fallback",
    "multiple_roots",
]


def _opt(v) -> str:
    return "" if v is None else repr(v)


def write_trials_csv(path: str | Path, records: Sequence[TrialRecord]) -> None:
    """Versioned comment line, column header, one row per trial."""
    with Path(path).open("w", newline="") as fh:
        fh.write(f"# format: {TRIALS_FORMAT}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.estimator.value,
                    r.k,
                    repr(r.p),
                    _opt(r.s),
                    _opt(r.coverage),
                    r.reference,
                    r.trial,
                    r.seed,
                    repr(r.p_raw),
                    repr(r.p_clamped),
                    repr(r.rel_error),
                    r.error,
                    "" if r.lambda_threshold is None else r.lambda_threshold,
                    int(r.lambda_fallback),
                    int(r.multiple_roots),
                ]
            )


def read_trials_csv(path: str | Path) -> list[TrialRecord]:
    with Path(path).open(newline="") as fh:
        head = fh.readline().strip()
        if head != f"# format: {TRIALS_FORMAT}":
            raise ValueError(f"{path}: unrecognized trials format line {head!r}")
        reader = csv.DictReader(fh)
        records = []
        for row in reader:
            records.append(
                TrialRecord(
                    estimator=EstimatorId(row["estimator"]),
                    k=int(row["k"]),
                    p=float(row["p"]),
                    s=float(row["s"]) if row["s"] else None,
                    coverage=float(row["coverage"]) if row["coverage"] else None,
                    reference=int(row["reference"]),
                    trial=int(row["trial"]),
                    seed=int(row["seed"]),
                    p_raw=float(row["p_raw"]),
                    p_clamped=float(row["p_clamped"]),
                    rel_error=float(row["rel_error"]),
                    error=row["error"],
                    lambda_threshold=int(row["lambda_threshold"]) if row["lambda_threshold"] else None,
                    lambda_fallback=row["lambda_fallback"] == "1",
                    multiple_roots=row["multiple_roots"] == "1",
                )
            )
    return records


def _none_if_nan(v: float) -> float | None:
    return None if math.isnan(v) else v


def config_to_dict(config: ExperimentConfig) -> dict:
    src = config.source
    if isinstance(src, IidSource):
        source = {
            "kind": "iid",
            "length": src.length,
            "distribution": list(src.distribution),
            "num_references": src.num_references,
        }
    else:
        source = {"kind": "fasta", "path": src.path, "on_invalid": src.on_invalid}
    subset = None
    if config.subset is not None:
        subset = {"kind": config.subset.kind}
        if config.subset.m is not None:
            subset["m"] = config.subset.m
        if config.subset.kmers is not None:
            subset["kmers"] = list(config.subset.kmers)
    return {
        "source": source,
        "mode": config.mode.value,
        "estimators": [e.value for e in config.estimators],
        "p_grid": list(config.p_grid),
        "trials_per_point": config.trials_per_point,
        "master_seed": config.master_seed,
        "k_values": list(config.k_values),
        "s_grid": list(config.s_grid),
        "coverage_grid": list(config.coverage_grid),
        "read_len": config.read_len,
        "k1_base": config.k1_base,
        "subset": subset,
        "y_coverage": config.y_coverage,
        "y_read_len": config.y_read_len,
    }


def summary_to_dict(config: ExperimentConfig, records: Sequence[TrialRecord]) -> dict:
    groups = []
    for gp, stats in summarize(records).items():
        groups.append(
            {
                "estimator": gp.estimator.value,
                "k": gp.k,
                "p": gp.p,
                "s": gp.s,
                "coverage": gp.coverage,
                "count": stats.count,
                "median": _none_if_nan(stats.median),
                "q1": _none_if_nan(stats.q1),
                "q3": _none_if_nan(stats.q3),
                "whisker_low": _none_if_nan(stats.whisker_low),
                "whisker_high": _none_if_nan(stats.whisker_high),
                "mean": _none_if_nan(stats.mean),
                "stddev": _none_if_nan(stats.stddev),
                "error_count": stats.error_count,
            }
        )
    return {
        "format": SUMMARY_FORMAT,
        "config": config_to_dict(config),
        "num_trials": len(records),
        "groups": groups,
    }


def write_summary_json(
    path: str | Path, config: ExperimentConfig, records: Sequence[TrialRecord]
) -> None:
    Path(path).write_text(json.dumps(summary_to_dict(config, records), indent=2) + "\n")
