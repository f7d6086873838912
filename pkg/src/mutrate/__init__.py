"""Substitution-rate estimation from k-mer statistics.

Estimate the per-position substitution rate between a source sequence and a
mutated copy, either from complete k-mer spectra or from noisy fixed-length
reads of both, plus the concentration bounds that say when the single-base
estimators can work and a Monte-Carlo harness for error distributions.
"""

from .bounds import (
    Budgets,
    ReadBoundParams,
    equal_budgets,
    hoeffding_tail,
    mcdiarmid_tail,
    min_deviation_sequence,
    required_deviation_reads,
    success_probability,
)
from .errors import (
    EmptyRetainedSet,
    FastaParseError,
    MismatchedK,
    MutrateError,
    NoRootInRange,
    SingularDenominator,
)
from .estimators import (
    Diagnostics,
    EstimateResult,
    EstimatorId,
    LambdaSelection,
    SubsetSpec,
    estimate_general_k,
    estimate_k1_gc,
    estimate_k1_reads,
    estimate_k1_single,
    estimate_large_k_reads,
    estimate_large_k_seq,
    find_smallest_root,
    select_lambda,
)
from .harness import (
    BoxStats,
    ExperimentConfig,
    FastaSource,
    GridPoint,
    IidSource,
    Mode,
    TrialRecord,
    box_stats,
    choose_k1_base,
    derive_seed,
    read_trials_csv,
    run_experiment,
    summarize,
    write_summary_json,
    write_trials_csv,
)
from .kmers import (
    AbundanceHistogram,
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
from .model import (
    CircularSequence,
    Read,
    ReadSet,
    SubstitutionChannel,
    generate_iid_sequence,
    mutate,
    sample_reads,
)
from .seqio import (
    FastaRecord,
    parse_fasta,
    read_fasta,
    read_kmer_table,
    read_reads,
    write_fasta,
    write_kmer_table,
    write_reads,
)

__version__ = "0.1.0"

__all__ = [
    "AbundanceHistogram",
    "BoxStats",
    "Budgets",
    "CircularSequence",
    "Diagnostics",
    "EmptyRetainedSet",
    "EstimateResult",
    "EstimatorId",
    "ExperimentConfig",
    "FastaParseError",
    "FastaRecord",
    "FastaSource",
    "GridPoint",
    "IidSource",
    "KmerTable",
    "LambdaSelection",
    "MAX_K",
    "Mode",
    "MismatchedK",
    "MutrateError",
    "NoRootInRange",
    "Read",
    "ReadBoundParams",
    "ReadSet",
    "SingularDenominator",
    "SubsetSpec",
    "SubstitutionChannel",
    "TrialRecord",
    "abundance_histogram",
    "box_stats",
    "choose_k1_base",
    "count_kmers_reads",
    "count_kmers_sequence",
    "decode_kmer",
    "derive_seed",
    "encode_kmer",
    "equal_budgets",
    "estimate_general_k",
    "estimate_k1_gc",
    "estimate_k1_reads",
    "estimate_k1_single",
    "estimate_large_k_reads",
    "estimate_large_k_seq",
    "expected_kmer_count",
    "find_smallest_root",
    "generate_iid_sequence",
    "hamming_distance",
    "hoeffding_tail",
    "mcdiarmid_tail",
    "merge_tables",
    "min_deviation_sequence",
    "mutate",
    "packed_hamming",
    "parse_fasta",
    "read_fasta",
    "read_kmer_table",
    "read_reads",
    "read_trials_csv",
    "required_deviation_reads",
    "run_experiment",
    "sample_reads",
    "select_lambda",
    "success_probability",
    "summarize",
    "write_fasta",
    "write_kmer_table",
    "write_reads",
    "write_summary_json",
    "write_trials_csv",
]
