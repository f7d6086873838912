"""k-mer counting and spectra for circular sequences and read sets.

k-mers are packed two bits per symbol (A=00, C=01, G=10, T=11, leftmost
symbol in the highest bits) into Python ints, which keeps table keys hashable
and the packing exact for k up to 32. Counting runs over uint64 arrays and
``np.unique``; nothing here materializes all 4^k strings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .errors import MismatchedK
from .model import ALPHABET, CircularSequence, ReadSet

MAX_K = 32

_BYTE_TO_CODE = {ch: i for i, ch in enumerate(ALPHABET)}


def _check_k(k: int) -> None:
    if not 1 <= k <= MAX_K:
        raise ValueError(f"k must be in 1..{MAX_K}, got {k}")


def encode_kmer(kmer: str) -> int:
    """Pack a k-mer string into its 2-bit integer code."""
    _check_k(len(kmer))
    val = 0
    for ch in kmer:
        code = _BYTE_TO_CODE.get(ch.upper())
        if code is None:
            raise ValueError(f"invalid nucleotide {ch!r} in k-mer {kmer!r}")
        val = (val << 2) | code
    return val


def decode_kmer(value: int, k: int) -> str:
    """Inverse of :func:`encode_kmer` for a given k."""
    _check_k(k)
    if not 0 <= value < 4**k:
        raise ValueError(f"packed value {value} out of range for k={k}")
    out = []
    for shift in range(2 * (k - 1), -1, -2):
        out.append(ALPHABET[(value >> shift) & 3])
    return "".join(out)


def hamming_distance(a: str, b: str) -> int:
    """Number of mismatching positions between two equal-length strings."""
    if len(a) != len(b):
        raise MismatchedK(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(a, b))


_ODD_MASK = np.uint64(0x5555555555555555)

try:  # numpy >= 2.0
    _popcount = np.bitwise_count
except AttributeError:  # pragma: no cover - fallback for older numpy
    _POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)

    def _popcount(v: np.ndarray) -> np.ndarray:
        return _POP8[v.view(np.uint8)].reshape(*v.shape, 8).sum(axis=-1, dtype=np.uint8)


def packed_hamming(a, b) -> np.ndarray:
    """Hamming distance between 2-bit packed k-mers, vectorized.

    Works elementwise with broadcasting, so one side can be a column vector
    to get an all-pairs distance matrix.
    """
    z = np.bitwise_xor(np.asarray(a, dtype=np.uint64), np.asarray(b, dtype=np.uint64))
    mism = (z | (z >> np.uint64(1))) & _ODD_MASK
    return _popcount(mism).astype(np.int64)


def _pack_windows(codes: np.ndarray, k: int) -> np.ndarray:
    """Pack every length-k window of a circular code array.

    Returns one uint64 per position of the input (all ``len(codes)`` circular
    windows), via Horner's scheme over k wrapped slices.
    """
    n = codes.size
    ext = np.concatenate([codes, codes[: k - 1]]) if k > 1 else codes
    vals = np.zeros(n, dtype=np.uint64)
    for j in range(k):
        vals <<= np.uint64(2)
        vals |= ext[j : j + n].astype(np.uint64)
    return vals


def _pack_read_windows(matrix: np.ndarray, k: int) -> np.ndarray:
    """Pack the (L - k + 1) linear windows of every read; flat result."""
    N, L = matrix.shape
    if k > L:
        raise ValueError(f"k={k} exceeds read length {L}")
    w = L - k + 1
    vals = np.zeros((N, w), dtype=np.uint64)
    for j in range(k):
        vals <<= np.uint64(2)
        vals |= matrix[:, j : j + w].astype(np.uint64)
    return vals.reshape(-1)


@dataclass(frozen=True, eq=False)
class KmerTable:
    """Multiset of k-mers: packed keys with positive integer counts.

    ``provenance`` records whether counts came from a full sequence or from
    reads; it only gates which estimators accept the table and how files are
    labeled.
    """

    k: int
    keys: np.ndarray
    counts: np.ndarray
    provenance: str = "sequence"

    def __post_init__(self):
        _check_k(self.k)
        keys = np.ascontiguousarray(self.keys, dtype=np.uint64)
        counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        if keys.ndim != 1 or counts.shape != keys.shape:
            raise ValueError("keys and counts must be 1-D arrays of equal length")
        if np.any(counts <= 0):
            raise ValueError("counts must be positive (absent k-mers are implicit zeros)")
        if keys.size:
            if keys.size > 1 and np.any(np.diff(keys.astype(np.int64)) <= 0):
                order = np.argsort(keys)
                keys = keys[order]
                counts = counts[order]
                if np.any(np.diff(keys.astype(np.int64)) == 0):
                    raise ValueError("duplicate keys in table")
            if self.k < 32 and int(keys[-1]) >= 4**self.k:
                raise ValueError(f"key {int(keys[-1])} out of range for k={self.k}")
        if self.provenance not in ("sequence", "reads"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_mapping(cls, k: int, mapping: Mapping[str, int], provenance: str = "sequence") -> "KmerTable":
        keys = []
        counts = []
        for kmer, c in mapping.items():
            if len(kmer) != k:
                raise MismatchedK(f"k-mer {kmer!r} has length {len(kmer)}, table k={k}")
            if c == 0:
                continue
            keys.append(encode_kmer(kmer))
            counts.append(int(c))
        if keys:
            keys_arr = np.array(keys, dtype=np.uint64)
            counts_arr = np.array(counts, dtype=np.int64)
        else:
            keys_arr = np.empty(0, dtype=np.uint64)
            counts_arr = np.empty(0, dtype=np.int64)
        return cls(k, keys_arr, counts_arr, provenance)

    @property
    def total(self) -> int:
        """Sum of all counts."""
        return int(self.counts.sum())

    @property
    def distinct(self) -> int:
        return int(self.keys.size)

    def count(self, kmer: str) -> int:
        """Count of one k-mer (zero when absent)."""
        if len(kmer) != self.k:
            raise MismatchedK(f"query length {len(kmer)} vs table k={self.k}")
        return self.count_packed(encode_kmer(kmer))

    def count_packed(self, value: int) -> int:
        i = int(np.searchsorted(self.keys, np.uint64(value)))
        if i < self.keys.size and int(self.keys[i]) == value:
            return int(self.counts[i])
        return 0

    def counts_for(self, packed: np.ndarray) -> np.ndarray:
        """Vectorized lookup; zeros for absent keys."""
        packed = np.asarray(packed, dtype=np.uint64)
        idx = np.searchsorted(self.keys, packed)
        idx_c = np.minimum(idx, max(self.keys.size - 1, 0))
        if self.keys.size == 0:
            return np.zeros(packed.shape, dtype=np.int64)
        hit = self.keys[idx_c] == packed
        return np.where(hit, self.counts[idx_c], 0)

    def items(self) -> Iterator[tuple[str, int]]:
        """(k-mer string, count) pairs in packed-key order."""
        for key, c in zip(self.keys.tolist(), self.counts.tolist()):
            yield decode_kmer(key, self.k), int(c)

    def to_dict(self) -> dict[str, int]:
        return dict(self.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KmerTable):
            return NotImplemented
        return (
            self.k == other.k
            and self.provenance == other.provenance
            and np.array_equal(self.keys, other.keys)
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None


def count_kmers_sequence(x: CircularSequence, k: int) -> KmerTable:
    """Counts over all ``len(x)`` circular windows of ``x``; totals to len(x)."""
    _check_k(k)
    if k > len(x):
        raise ValueError(f"k={k} exceeds sequence length {len(x)}")
    vals = _pack_windows(x.codes, k)
    keys, counts = np.unique(vals, return_counts=True)
    return KmerTable(k, keys, counts.astype(np.int64), provenance="sequence")


def count_kmers_reads(reads: ReadSet, k: int) -> KmerTable:
    """Counts pooled over the linear windows of every read.

    Each read of length L contributes L - k + 1 windows; reads do not wrap.
    Total is N * (L - k + 1).
    """
    _check_k(k)
    if reads.num_reads == 0:
        return KmerTable(k, np.empty(0, dtype=np.uint64), np.empty(0, dtype=np.int64), provenance="reads")
    vals = _pack_read_windows(reads.matrix, k)
    keys, counts = np.unique(vals, return_counts=True)
    return KmerTable(k, keys, counts.astype(np.int64), provenance="reads")


def merge_tables(a: KmerTable, b: KmerTable) -> KmerTable:
    """Sum two tables of the same k; provenance must match."""
    if a.k != b.k:
        raise MismatchedK(f"cannot merge tables with k={a.k} and k={b.k}")
    if a.provenance != b.provenance:
        raise ValueError(f"cannot merge provenance {a.provenance!r} with {b.provenance!r}")
    keys = np.concatenate([a.keys, b.keys])
    counts = np.concatenate([a.counts, b.counts])
    uk, inv = np.unique(keys, return_inverse=True)
    summed = np.zeros(uk.size, dtype=np.int64)
    np.add.at(summed, inv, counts)
    return KmerTable(a.k, uk, summed, a.provenance)


@dataclass(frozen=True)
class AbundanceHistogram:
    """How many distinct k-mers occur exactly i times, for i >= 1."""

    k: int
    counts: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for mult, n in self.counts.items():
            if mult < 1 or n < 0:
                raise ValueError("histogram keys must be >= 1 and values >= 0")
            if n:
                clean[int(mult)] = int(n)
        object.__setattr__(self, "counts", clean)

    @property
    def num_distinct(self) -> int:
        return sum(self.counts.values())

    @property
    def total_mass(self) -> int:
        return sum(m * n for m, n in self.counts.items())


def abundance_histogram(table: KmerTable) -> AbundanceHistogram:
    """Collapse a table to its abundance histogram.

    Invariants: sum_i i * a_i equals the table total, and sum_i a_i equals
    the number of distinct k-mers.
    """
    mults, freq = np.unique(table.counts, return_counts=True)
    return AbundanceHistogram(table.k, dict(zip(mults.tolist(), freq.tolist())))


_CHUNK = 4096


def expected_kmer_count(
    query: str,
    source: KmerTable,
    subst_rate: float,
    scale: float = 1.0,
) -> float:
    """Expected count of ``query`` after the whole source spectrum passes
    through a substitution channel.

    Every source occurrence of a word w at Hamming distance d from the query
    turns into the query with probability (1-rate)^(k-d) * (rate/3)^d. With
    ``scale=1`` this is the expectation for a mutated copy of the sequence
    itself; for reads, pass scale = N*(L-k+1)/G to convert sequence counts
    into expected window counts.
    """
    k = source.k
    if source.provenance != "sequence":
        raise ValueError("expectations are defined over a full-sequence table")
    if len(query) != k:
        raise MismatchedK(f"query length {len(query)} vs table k={k}")
    if not 0.0 <= subst_rate < 1.0:
        raise ValueError(f"substitution rate must be in [0, 1), got {subst_rate}")
    q = np.uint64(encode_kmer(query))
    keep = 1.0 - subst_rate
    flip = subst_rate / 3.0
    # per-distance transition probabilities, exact at rate 0
    probs = np.array([keep ** (k - d) * flip**d for d in range(k + 1)])
    total = 0.0
    for lo in range(0, source.keys.size, _CHUNK):
        keys = source.keys[lo : lo + _CHUNK]
        counts = source.counts[lo : lo + _CHUNK].astype(np.float64)
        d = packed_hamming(keys, q)
        total += float(np.dot(counts, probs[d]))
    return scale * total


def distance_profile(target_keys: np.ndarray, source: KmerTable, k: int) -> np.ndarray:
    """M[d] = sum of source counts at Hamming distance d from any target key.

    Collapses an all-pairs distance computation into k+1 coefficients, so a
    moment function of the rate can be evaluated in O(k) afterwards.
    """
    target_keys = np.asarray(target_keys, dtype=np.uint64)
    M = np.zeros(k + 1, dtype=np.float64)
    if target_keys.size == 0 or source.keys.size == 0:
        return M
    # chunk the source side; the target side rarely needs it but cap anyway
    for lo_t in range(0, target_keys.size, _CHUNK):
        t = target_keys[lo_t : lo_t + _CHUNK, None]
        for lo_s in range(0, source.keys.size, _CHUNK):
            s = source.keys[None, lo_s : lo_s + _CHUNK]
            c = source.counts[lo_s : lo_s + _CHUNK].astype(np.float64)
            d = packed_hamming(t, s)
            for dist in range(k + 1):
                mask = d == dist
                if mask.any():
                    M[dist] += float(c[np.nonzero(mask)[1]].sum())
    return M
