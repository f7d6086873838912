"""Substitution-rate estimators.

Three families:

* closed-form single-symbol estimators (one nucleotide's frequency, GC
  content, or one nucleotide's read counts),
* a general-k moment matcher that numerically inverts the expected k-mer
  spectrum over a chosen subset of source k-mers,
* large-k estimators that treat k-mer survival as all-or-nothing and read
  the rate off the surviving mass, with a count threshold to cut sequencer
  noise on the read-based variant.

Estimates are returned raw (they can leave [0, 1] on bad luck) next to a
clamped copy; downstream error statistics use the raw value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, NamedTuple, Sequence, Union

import numpy as np

from .errors import EmptyRetainedSet, MismatchedK, NoRootInRange, SingularDenominator
from .kmers import KmerTable, distance_profile, encode_kmer

GRID_POINTS = 256
SEARCH_MAX = 0.75
BISECT_TOL = 1e-9

MutatedCounts = Union[KmerTable, Mapping[str, float]]


class EstimatorId(str, Enum):
    K1_SINGLE = "k1-single"
    K1_GC = "k1-gc"
    GENERAL_K = "general-k"
    LARGE_K_SEQ = "large-k-seq"
    K1_READS = "k1-reads"
    LARGE_K_READS = "large-k-reads"


READ_BASED = frozenset({EstimatorId.K1_READS, EstimatorId.LARGE_K_READS})


@dataclass(frozen=True)
class Diagnostics:
    """Side facts about how an estimate was produced."""

    lambda_threshold: int | None = None
    retained_mass: float | None = None
    root_bracket: tuple[float, float] | None = None
    lambda_fallback: bool = False
    multiple_roots: bool = False


@dataclass(frozen=True)
class EstimateResult:
    estimator: EstimatorId
    p_raw: float
    p_clamped: float
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    warnings: tuple[str, ...] = ()


def _result(
    estimator: EstimatorId,
    p_raw: float,
    diagnostics: Diagnostics | None = None,
    warnings: Sequence[str] = (),
) -> EstimateResult:
    p_raw = float(p_raw)
    return EstimateResult(
        estimator=estimator,
        p_raw=p_raw,
        p_clamped=min(1.0, max(0.0, p_raw)),
        diagnostics=diagnostics if diagnostics is not None else Diagnostics(),
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# closed-form k=1 estimators


def estimate_k1_single(f_base: float, f_prime_base: float, total_len: float) -> EstimateResult:
    """Rate from one nucleotide's count before (``f_base``) and after
    (``f_prime_base``) mutation, on a sequence of ``total_len`` symbols.

    Solves f' = f(1-p) + (G-f)p/3 for p. Undefined when the base occupies
    exactly a quarter of the sequence (the count is then rate-invariant).
    """
    if total_len <= 0:
        raise ValueError(f"total length must be positive, got {total_len}")
    if not 0 <= f_base <= total_len:
        raise ValueError(f"source count {f_base} outside [0, {total_len}]")
    if not 0 <= f_prime_base <= total_len:
        raise ValueError(f"mutated count {f_prime_base} outside [0, {total_len}]")
    den = total_len - 4.0 * f_base
    if den == 0.0:
        raise SingularDenominator(
            "base frequency is exactly 1/4 of the sequence; its count does not move with the rate"
        )
    return _result(EstimatorId.K1_SINGLE, 3.0 * (f_prime_base - f_base) / den)


def estimate_k1_gc(x_gc: float, y_gc: float) -> EstimateResult:
    """Rate from GC fractions of the source (``x_gc``) and mutated (``y_gc``)
    sequences. Undefined at source GC exactly 1/2."""
    for name, v in (("x_gc", x_gc), ("y_gc", y_gc)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    den = 2.0 - 4.0 * x_gc
    if den == 0.0:
        raise SingularDenominator(
            "source GC fraction is exactly 1/2; GC content does not move with the rate"
        )
    return _result(EstimatorId.K1_GC, 3.0 * (y_gc - x_gc) / den)


def estimate_k1_reads(
    h_base: float,
    h_prime_base: float,
    num_reads: int,
    read_len: int,
) -> EstimateResult:
    """Rate from one nucleotide's pooled count in reads of the source
    (``h_base``) and of the mutated copy (``h_prime_base``).

    Both read sets must share ``num_reads`` and ``read_len``; sequencer
    noise cancels between the two sides. Undefined when the base fills
    exactly a quarter of the read volume.
    """
    if num_reads < 1 or read_len < 1:
        raise ValueError("num_reads and read_len must be >= 1")
    volume = float(num_reads) * float(read_len)
    if not 0 <= h_base <= volume:
        raise ValueError(f"source read count {h_base} outside [0, {volume}]")
    if not 0 <= h_prime_base <= volume:
        raise ValueError(f"mutated read count {h_prime_base} outside [0, {volume}]")
    den = volume - 4.0 * h_base
    if den == 0.0:
        raise SingularDenominator(
            "base frequency is exactly 1/4 of the read volume; its count does not move with the rate"
        )
    return _result(EstimatorId.K1_READS, 3.0 * (h_prime_base - h_base) / den)


# ---------------------------------------------------------------------------
# mutated-side access: integer tables or {k-mer: expected count} mappings


def _as_packed_counts(mutated: MutatedCounts, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalize the mutated side into sorted packed keys + float counts."""
    if isinstance(mutated, KmerTable):
        if mutated.k != k:
            raise MismatchedK(f"mutated table has k={mutated.k}, source has k={k}")
        return mutated.keys, mutated.counts.astype(np.float64)
    keys = []
    vals = []
    for kmer, c in mutated.items():
        if len(kmer) != k:
            raise MismatchedK(f"k-mer {kmer!r} has length {len(kmer)}, expected {k}")
        c = float(c)
        if c < 0:
            raise ValueError(f"negative count for {kmer!r}")
        keys.append(encode_kmer(kmer))
        vals.append(c)
    keys_arr = np.array(keys, dtype=np.uint64) if keys else np.empty(0, dtype=np.uint64)
    vals_arr = np.array(vals, dtype=np.float64) if vals else np.empty(0, dtype=np.float64)
    order = np.argsort(keys_arr)
    keys_arr = keys_arr[order]
    vals_arr = vals_arr[order]
    if keys_arr.size > 1 and np.any(np.diff(keys_arr.astype(np.int64)) == 0):
        raise ValueError("duplicate k-mers in mutated counts")
    return keys_arr, vals_arr


def _mass_over(keys: np.ndarray, vals: np.ndarray, wanted: np.ndarray) -> float:
    """Sum of ``vals`` at the ``wanted`` packed keys (absent keys add zero)."""
    if keys.size == 0 or wanted.size == 0:
        return 0.0
    idx = np.searchsorted(keys, wanted)
    idx_c = np.minimum(idx, keys.size - 1)
    hit = keys[idx_c] == wanted
    return float(vals[idx_c][hit].sum())


# ---------------------------------------------------------------------------
# subset selection for the general-k moment matcher


@dataclass(frozen=True)
class SubsetSpec:
    """Which source k-mers the moment matcher sums over.

    ``all`` uses every k-mer of the source; ``top(m)`` the m most frequent
    (ties broken toward the lexicographically smaller k-mer); ``explicit``
    a caller-supplied list, which must be a subset of the source's k-mers.
    """

    kind: str = "all"
    m: int | None = None
    kmers: tuple[str, ...] | None = None

    @classmethod
    def all(cls) -> "SubsetSpec":
        return cls("all")

    @classmethod
    def top(cls, m: int) -> "SubsetSpec":
        if m < 1:
            raise ValueError(f"top subset size must be >= 1, got {m}")
        return cls("top", m=m)

    @classmethod
    def explicit(cls, kmers: Sequence[str]) -> "SubsetSpec":
        if not kmers:
            raise ValueError("explicit subset must be nonempty")
        return cls("explicit", kmers=tuple(kmers))

    def resolve(self, source: KmerTable) -> np.ndarray:
        """Packed keys of the subset, sorted ascending."""
        if self.kind == "all":
            return source.keys
        if self.kind == "top":
            # stable sort on (-count, key): equal counts fall back to key order
            order = np.lexsort((source.keys, -source.counts))
            take = order[: min(self.m, source.distinct)]
            return np.sort(source.keys[take])
        if self.kind == "explicit":
            packed = np.array([encode_kmer(s) for s in self.kmers], dtype=np.uint64)
            uniq = np.unique(packed)
            if uniq.size != packed.size:
                raise ValueError("explicit subset contains duplicate k-mers")
            present = source.counts_for(uniq) > 0
            if not np.all(present):
                from .kmers import decode_kmer

                missing = [decode_kmer(int(v), source.k) for v in uniq[~present]]
                raise ValueError(
                    f"subset k-mers absent from the source table: {', '.join(missing)}"
                )
            return uniq
        raise ValueError(f"unknown subset kind {self.kind!r}")


# ---------------------------------------------------------------------------
# root finding on [0, SEARCH_MAX]


def _bisect(g: Callable[[float], float], lo: float, hi: float, g_lo: float) -> float:
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_smallest_root(
    g: Callable[[float], float],
    lo: float = 0.0,
    hi: float = SEARCH_MAX,
) -> tuple[float, tuple[float, float], bool]:
    """Smallest root of ``g`` on [lo, hi] by grid scan plus bisection.

    Scans GRID_POINTS equally spaced points; an exact zero counts as a root,
    a sign change between neighbors is bisected down to BISECT_TOL. Returns
    (root, bracket, more_than_one). Raises :class:`NoRootInRange` when the
    grid sees no zero and no sign change.
    """
    qs = np.linspace(lo, hi, GRID_POINTS)
    vals = np.array([g(float(q)) for q in qs], dtype=np.float64)
    roots: list[tuple[float, tuple[float, float]]] = []
    for i in range(GRID_POINTS):
        if vals[i] == 0.0:
            q = float(qs[i])
            roots.append((q, (q, q)))
        elif i + 1 < GRID_POINTS and vals[i + 1] != 0.0 and (vals[i] > 0) != (vals[i + 1] > 0):
            root = _bisect(g, float(qs[i]), float(qs[i + 1]), float(vals[i]))
            roots.append((root, (float(qs[i]), float(qs[i + 1]))))
    if not roots:
        raise NoRootInRange(
            f"moment equation has no sign change on [{lo}, {hi}]"
        )
    roots.sort(key=lambda r: r[0])
    root, bracket = roots[0]
    return root, bracket, len(roots) > 1


# ---------------------------------------------------------------------------
# general-k moment matcher


def estimate_general_k(
    source: KmerTable,
    mutated: MutatedCounts,
    subset: SubsetSpec | None = None,
) -> EstimateResult:
    """Rate whose expected mutated spectrum matches the observed one, summed
    over a subset of the source's k-mers.

    The expectation of a k-mer's mutated count is a degree-k polynomial in
    the rate, weighted by how much source mass sits at each Hamming distance;
    those weights are precomputed once so each evaluation is O(k). The
    smallest root on [0, 0.75] is returned; additional roots only raise a
    warning because the small-rate regime is the intended one.
    """
    if source.provenance != "sequence":
        raise ValueError("moment matching is defined on full-sequence tables")
    subset = subset or SubsetSpec.all()
    sub_keys = subset.resolve(source)
    if sub_keys.size == 0:
        raise ValueError("empty subset")
    k = source.k
    if sub_keys.size == 4**k:
        # summing over every possible k-mer conserves the total count, so the
        # matched moment is constant in the rate and carries no information
        raise ValueError(
            "subset covers all possible k-mers; restrict it (e.g. top:m) or raise k"
        )
    m_keys, m_vals = _as_packed_counts(mutated, k)
    target = _mass_over(m_keys, m_vals, sub_keys)
    profile = distance_profile(sub_keys, source, k)

    def g(q: float) -> float:
        keep = 1.0 - q
        flip = q / 3.0
        acc = 0.0
        for d in range(k + 1):
            if profile[d]:
                acc += profile[d] * keep ** (k - d) * flip**d
        return acc - target

    root, bracket, multiple = find_smallest_root(g)
    warnings = []
    if multiple:
        warnings.append(
            "moment equation has more than one root on [0, 0.75]; reporting the smallest"
        )
    diag = Diagnostics(root_bracket=bracket, multiple_roots=multiple)
    return _result(EstimatorId.GENERAL_K, root, diag, warnings)


# ---------------------------------------------------------------------------
# large-k survival estimators


def estimate_large_k_seq(source: KmerTable, mutated: MutatedCounts) -> EstimateResult:
    """Rate from the mutated-spectrum mass that stayed on the source's k-mer
    set, assuming k is large enough that mutated k-mers rarely collide with
    other source k-mers: that mass is G(1-p)^k in expectation."""
    if source.provenance != "sequence":
        raise ValueError("sequence-level survival needs a full-sequence table")
    k = source.k
    total = source.total
    if total == 0:
        raise EmptyRetainedSet("source table is empty")
    m_keys, m_vals = _as_packed_counts(mutated, k)
    mass = _mass_over(m_keys, m_vals, source.keys)
    ratio = mass / total
    p_raw = 1.0 - ratio ** (1.0 / k)
    diag = Diagnostics(retained_mass=float(mass))
    return _result(EstimatorId.LARGE_K_SEQ, p_raw, diag)


class LambdaSelection(NamedTuple):
    """Chosen count threshold plus what survives it."""

    lam: int
    retained_mass: int
    fallback: bool


def select_lambda(source: KmerTable, error_rate: float) -> LambdaSelection:
    """Largest count threshold >= 2 that keeps at least a (1-s)^k fraction
    of the source read k-mer mass.

    With sequencer error rate s, roughly (1-s)^k of read k-mer mass is
    error-free, so thresholding may discard at most the complement. When
    even threshold 2 cuts too deep (low coverage or tiny inputs), fall back
    to 1, flagged, which disables noise filtering.
    """
    if not 0.0 <= error_rate < 1.0:
        raise ValueError(f"error rate must be in [0, 1), got {error_rate}")
    if source.distinct == 0:
        raise EmptyRetainedSet("cannot choose a threshold for an empty table")
    total = source.total
    threshold = (1.0 - error_rate) ** source.k * total
    slack = 1e-9 * max(1.0, float(total))
    vals, freq = np.unique(source.counts, return_counts=True)  # ascending
    vals_desc = vals[::-1]
    cum_desc = np.cumsum((vals * freq)[::-1])
    qualifies = cum_desc + slack >= threshold
    idx = int(np.argmax(qualifies))  # first True; total always qualifies
    lam_candidate = int(vals_desc[idx])
    if lam_candidate >= 2:
        return LambdaSelection(lam_candidate, int(cum_desc[idx]), False)
    return LambdaSelection(1, int(total), True)


def estimate_large_k_reads(
    source: KmerTable,
    mutated: MutatedCounts,
    error_rate: float,
    mutated_scale: float = 1.0,
) -> EstimateResult:
    """Rate from read k-mer mass surviving on the source's high-count k-mers.

    The threshold from :func:`select_lambda` keeps k-mers that are almost
    surely real sequence content; the ratio of mutated-side to source-side
    mass on that set falls like (1-p)^k because sequencer noise contributes
    the same factor to both sides. ``mutated_scale`` rescales the mutated
    side when its read volume differs from the source's (it multiplies the
    surviving mass by source volume / mutated volume).

    ``error_rate`` may safely be an upper bound rather than the exact
    sequencer rate: overstating s only lowers the mass floor, so the chosen
    threshold filters at least as aggressively, and the survival ratio
    itself never depends on s.
    """
    if source.provenance != "reads":
        raise ValueError("read-level survival needs a read-derived table")
    if mutated_scale <= 0:
        raise ValueError(f"mutated_scale must be positive, got {mutated_scale}")
    sel = select_lambda(source, error_rate)
    retained = source.keys[source.counts >= sel.lam]
    den = float(sel.retained_mass)
    if den <= 0:
        raise EmptyRetainedSet("threshold retained no k-mer mass")
    k = source.k
    m_keys, m_vals = _as_packed_counts(mutated, k)
    num = _mass_over(m_keys, m_vals, retained) * mutated_scale
    ratio = num / den
    p_raw = 1.0 - ratio ** (1.0 / k)
    warnings = []
    if sel.fallback:
        warnings.append(
            "count threshold fell back to 1; sequencer noise is not being filtered"
        )
    diag = Diagnostics(
        lambda_threshold=sel.lam,
        retained_mass=den,
        lambda_fallback=sel.fallback,
    )
    return _result(EstimatorId.LARGE_K_READS, p_raw, diag, warnings)
