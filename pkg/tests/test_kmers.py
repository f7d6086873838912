import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from mutrate.errors import MismatchedK
from mutrate.kmers import (
    KmerTable,
    MAX_K,
    abundance_histogram,
    count_kmers_reads,
    count_kmers_sequence,
    decode_kmer,
    encode_kmer,
    expected_kmer_count,
    hamming_distance,
    merge_tables,
    packed_hamming,
)
from mutrate.model import (
    CircularSequence,
    ReadSet,
    SubstitutionChannel,
    generate_iid_sequence,
    sample_reads,
)

dna = st.text(alphabet="ACGT", min_size=1, max_size=40)
kmer = st.text(alphabet="ACGT", min_size=1, max_size=8)


class TestEncoding:
    @given(kmer)
    def test_round_trip(self, w):
        assert decode_kmer(encode_kmer(w), len(w)) == w

    def test_order_is_lexicographic(self):
        # packed integers sort exactly like the strings
        kmers = ["AA", "AC", "CA", "GT", "TT", "AG"]
        packed = [encode_kmer(w) for w in kmers]
        assert [w for _, w in sorted(zip(packed, kmers))] == sorted(kmers)

    def test_k_limit(self):
        with pytest.raises(ValueError):
            encode_kmer("A" * (MAX_K + 1))


class TestHamming:
    def test_examples(self):
        assert hamming_distance("ACGT", "ACGT") == 0
        assert hamming_distance("ACGT", "TCGA") == 2
        assert hamming_distance("AAAA", "TTTT") == 4

    def test_length_mismatch(self):
        with pytest.raises(MismatchedK):
            hamming_distance("AC", "ACG")

    @given(kmer, kmer, kmer)
    def test_metric_properties(self, a, b, c):
        k = min(len(a), len(b), len(c))
        a, b, c = a[:k], b[:k], c[:k]
        assert hamming_distance(a, b) == hamming_distance(b, a)
        assert (hamming_distance(a, b) == 0) == (a == b)
        assert hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c)

    @given(st.lists(kmer.filter(lambda w: len(w) == 6), min_size=1, max_size=12))
    def test_packed_matches_string(self, words):
        packed = np.array([encode_kmer(w) for w in words], dtype=np.uint64)
        mat = packed_hamming(packed[:, None], packed[None, :])
        for i, a in enumerate(words):
            for j, b in enumerate(words):
                assert mat[i, j] == oracles.hamming(a, b)


class TestCounting:
    def test_homopolymer(self):
        t = count_kmers_sequence(CircularSequence.from_string("AAAA"), 2)
        assert t.to_dict() == {"AA": 4}

    def test_wrap_included(self):
        t = count_kmers_sequence(CircularSequence.from_string("ACGT"), 2)
        assert t.to_dict() == {"AC": 1, "CG": 1, "GT": 1, "TA": 1}

    def test_period_two(self):
        t = count_kmers_sequence(CircularSequence.from_string("ACAC"), 3)
        assert t.to_dict() == {"ACA": 2, "CAC": 2}

    @given(dna, st.integers(1, 6))
    def test_against_oracle(self, text, k):
        if k > len(text):
            return
        t = count_kmers_sequence(CircularSequence.from_string(text), k)
        assert t.to_dict() == oracles.circular_kmer_counts(text, k)
        assert t.total == len(text)

    def test_k_exceeding_length_rejected(self):
        with pytest.raises(ValueError):
            count_kmers_sequence(CircularSequence.from_string("ACG"), 4)

    def test_reads_are_linear(self):
        x = CircularSequence.from_string("ACGTACGTAC")
        rs = sample_reads(x, 4, 50, SubstitutionChannel(0.0), rng_seed=1)
        t = count_kmers_reads(rs, 2)
        assert t.provenance == "reads"
        assert t.total == 50 * 3
        expected: dict[str, int] = {}
        for read in rs.reads:
            for w, c in oracles.linear_kmer_counts(read.to_string(), 2).items():
                expected[w] = expected.get(w, 0) + c
        assert t.to_dict() == expected

    def test_k_above_read_len_rejected(self):
        x = CircularSequence.from_string("ACGTACGT")
        rs = sample_reads(x, 3, 5, SubstitutionChannel(0.0), rng_seed=2)
        with pytest.raises(ValueError):
            count_kmers_reads(rs, 4)


class TestTable:
    def test_from_mapping_and_lookup(self):
        t = KmerTable.from_mapping(2, {"AC": 3, "TT": 1})
        assert t.count("AC") == 3
        assert t.count("GG") == 0
        assert t.distinct == 2 and t.total == 4

    def test_zero_counts_dropped_negative_rejected(self):
        t = KmerTable.from_mapping(2, {"AC": 0, "GT": 2})
        assert t.to_dict() == {"GT": 2}
        with pytest.raises(ValueError):
            KmerTable.from_mapping(2, {"AC": -1})

    def test_rejects_wrong_length(self):
        with pytest.raises(MismatchedK):
            KmerTable.from_mapping(2, {"ACG": 1})

    def test_items_sorted(self):
        t = KmerTable.from_mapping(2, {"TT": 1, "AC": 2, "GA": 5})
        assert [w for w, _ in t.items()] == ["AC", "GA", "TT"]

    def test_merge_additivity(self):
        a = KmerTable.from_mapping(2, {"AC": 1, "GG": 2})
        b = KmerTable.from_mapping(2, {"GG": 3, "TT": 1})
        m = merge_tables(a, b)
        assert m.to_dict() == {"AC": 1, "GG": 5, "TT": 1}
        assert m.total == a.total + b.total

    def test_merge_requires_same_k_and_provenance(self):
        a = KmerTable.from_mapping(2, {"AC": 1})
        with pytest.raises(MismatchedK):
            merge_tables(a, KmerTable.from_mapping(3, {"ACG": 1}))
        with pytest.raises(ValueError):
            merge_tables(a, KmerTable.from_mapping(2, {"AC": 1}, provenance="reads"))

    def test_merge_matches_pooled_counting(self):
        # counting two batches separately then merging equals counting the pool
        x = generate_iid_sequence(400, (0.25, 0.25, 0.25, 0.25), rng_seed=3)
        rs_a = sample_reads(x, 50, 12, SubstitutionChannel(0.02), rng_seed=4)
        rs_b = sample_reads(x, 50, 8, SubstitutionChannel(0.02), rng_seed=5)
        pooled = ReadSet(np.vstack([rs_a.matrix, rs_b.matrix]), len(x))
        merged = merge_tables(count_kmers_reads(rs_a, 3), count_kmers_reads(rs_b, 3))
        assert merged == count_kmers_reads(pooled, 3)


class TestAbundance:
    def test_histogram_example(self):
        t = KmerTable.from_mapping(1, {"A": 3, "C": 3, "G": 1})
        h = abundance_histogram(t)
        assert h.counts == {3: 2, 1: 1}
        assert h.num_distinct == t.distinct
        assert h.total_mass == t.total

    @given(dna, st.integers(1, 4))
    def test_invariants(self, text, k):
        if k > len(text):
            return
        t = count_kmers_sequence(CircularSequence.from_string(text), k)
        h = abundance_histogram(t)
        assert h.num_distinct == t.distinct
        assert h.total_mass == t.total
        assert all(mult >= 1 for mult in h.counts)


class TestExpectedCount:
    @pytest.mark.parametrize("rate", [0.0, 0.05, 0.3])
    def test_matches_closed_form_oracle(self, rate):
        x = CircularSequence.from_string("ACGGTTACGGA")
        t = count_kmers_sequence(x, 3)
        for q in ("ACG", "TTT", "GGA"):
            got = expected_kmer_count(q, t, rate)
            want = oracles.closed_form_expected_count(x.to_string(), q, rate)
            assert got == pytest.approx(want, abs=1e-12)

    def test_rate_zero_returns_source_count(self):
        t = count_kmers_sequence(CircularSequence.from_string("ACGTAACG"), 2)
        for w in ("AC", "GT", "TT"):
            assert expected_kmer_count(w, t, 0.0) == pytest.approx(t.count(w))

    @given(dna.filter(lambda s: len(s) >= 3), st.floats(0.0, 0.75))
    @settings(max_examples=30)
    def test_mass_conservation(self, text, rate):
        # expectations over all 4^k queries must sum to G
        t = count_kmers_sequence(CircularSequence.from_string(text), 2)
        total = sum(
            expected_kmer_count(a + b, t, rate) for a in "ACGT" for b in "ACGT"
        )
        assert total == pytest.approx(len(text), rel=1e-9)

    def test_scale_applies(self):
        t = count_kmers_sequence(CircularSequence.from_string("ACGT"), 1)
        assert expected_kmer_count("A", t, 0.0, scale=2.5) == pytest.approx(2.5)

    def test_read_table_rejected(self):
        x = CircularSequence.from_string("ACGTACGT")
        rs = sample_reads(x, 4, 5, SubstitutionChannel(0.0), rng_seed=1)
        t = count_kmers_reads(rs, 2)
        with pytest.raises(ValueError):
            expected_kmer_count("AC", t, 0.1)

    def test_mismatched_query_length(self):
        t = count_kmers_sequence(CircularSequence.from_string("ACGT"), 2)
        with pytest.raises(MismatchedK):
            expected_kmer_count("ACG", t, 0.1)
