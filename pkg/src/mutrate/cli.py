"""Command-line interface.

Subcommands mirror the library layers: ``gen``/``mutate``/``reads`` produce
data, ``count`` builds k-mer tables, ``estimate`` runs one estimator on
files, ``bounds`` evaluates the concentration formulas, and ``experiment``
drives the Monte-Carlo harness.

Numeric flags accept scientific notation (``--length 1e6``). Every
subcommand that draws random numbers requires an explicit ``--seed``.
Exit codes: 0 success, 1 domain or I/O failure (diagnostic on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds as bounds_mod
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
from .harness import (
    DEFAULT_COVERAGE,
    DEFAULT_READ_LEN,
    ExperimentConfig,
    FastaSource,
    IidSource,
    Mode,
    choose_k1_base,
    derive_seed,
    run_experiment,
    summary_to_dict,
    write_summary_json,
    write_trials_csv,
)
from .kmers import count_kmers_reads, count_kmers_sequence
from .model import (
    ALPHABET,
    SubstitutionChannel,
    encode_base,
    generate_iid_sequence,
    mutate,
    sample_reads,
)
from .seqio import (
    FastaRecord,
    read_fasta,
    read_kmer_table,
    read_reads,
    write_fasta,
    write_kmer_table,
    write_reads,
)


def _sci_int(text: str) -> int:
    """Integer flag that tolerates scientific notation (1e6, 2.5e3)."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v.is_integer():
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(v)


def _sci_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _dist(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            "distribution must be four comma-separated probabilities (A,C,G,T)"
        )
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad probability in {text!r}") from None
    return vals


def _subset(text: str) -> SubsetSpec:
    if text == "all":
        return SubsetSpec.all()
    if text.startswith("top:"):
        try:
            return SubsetSpec.top(int(text[4:]))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad subset size in {text!r}") from None
    if text.startswith("explicit:"):
        kmers = [s for s in text[len("explicit:") :].split(",") if s]
        if not kmers:
            raise argparse.ArgumentTypeError("explicit subset needs at least one k-mer")
        return SubsetSpec.explicit(kmers)
    raise argparse.ArgumentTypeError(
        f"subset must be 'all', 'top:M', or 'explicit:KMER,KMER,...', got {text!r}"
    )


def _base(text: str) -> str:
    if text == "auto" or text in ALPHABET:
        return text
    raise argparse.ArgumentTypeError(f"base must be 'auto' or one of ACGT, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(",") if p)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number in list {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(_sci_int(p) for p in text.split(",") if p)
    except argparse.ArgumentTypeError:
        raise argparse.ArgumentTypeError(f"bad integer in list {text!r}") from None


def _estimator_list(text: str) -> tuple[EstimatorId, ...]:
    names = [p for p in text.split(",") if p]
    if not names:
        raise argparse.ArgumentTypeError("estimator list is empty")
    try:
        return tuple(EstimatorId(n) for n in names)
    except ValueError:
        valid = ",".join(e.value for e in EstimatorId)
        raise argparse.ArgumentTypeError(
            f"unknown estimator in {text!r}; choose from {valid}"
        ) from None


def _pick_record(records: list[FastaRecord], index: int | None, path: str) -> FastaRecord:
    if index is None:
        if len(records) != 1:
            raise MutrateError(
                f"{path} holds {len(records)} records; pick one with --record"
            )
        return records[0]
    if not 0 <= index < len(records):
        raise MutrateError(f"--record {index} out of range for {path} ({len(records)} records)")
    return records[index]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mutrate",
        description="Estimate substitution rates from k-mer statistics of sequences or reads.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an i.i.d. random sequence as FASTA")
    p.add_argument("--length", type=_sci_int, required=True, help="sequence length")
    p.add_argument(
        "--dist",
        type=_dist,
        default=(0.25, 0.25, 0.25, 0.25),
        help="A,C,G,T probabilities (default uniform)",
    )
    p.add_argument("--seed", type=_sci_int, required=True)
    p.add_argument("--name", default="seq", help="FASTA record name")
    p.add_argument("--out", required=True, help="output FASTA path")

    p = sub.add_parser("mutate", help="pass every FASTA record through the substitution channel")
    p.add_argument("--in", dest="inp", required=True, help="input FASTA")
    p.add_argument("--rate", type=_sci_float, required=True, help="substitution rate")
    p.add_argument("--seed", type=_sci_int, required=True)
    p.add_argument("--out", required=True, help="output FASTA path")

    p = sub.add_parser("reads", help="sample noisy fixed-length reads from a sequence")
    p.add_argument("--in", dest="inp", required=True, help="input FASTA")
    p.add_argument("--record", type=_sci_int, default=None, help="record index when FASTA has several")
    p.add_argument("--read-len", type=_sci_int, default=DEFAULT_READ_LEN)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--num-reads", type=_sci_int, default=None)
    group.add_argument("--coverage", type=_sci_float, default=None, help=f"default {DEFAULT_COVERAGE}")
    p.add_argument("--error-rate", type=_sci_float, default=0.0, help="per-base sequencer error")
    p.add_argument("--seed", type=_sci_int, required=True)
    p.add_argument("--allow-wrap", action="store_true", help="permit reads longer than the sequence")
    p.add_argument("--out", required=True, help="output reads path")

    p = sub.add_parser("count", help="build a k-mer count table from FASTA or reads")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--fasta", help="count circular k-mers of one sequence")
    group.add_argument("--reads", help="count linear k-mers pooled over reads")
    p.add_argument("--record", type=_sci_int, default=None, help="record index for multi-record FASTA")
    p.add_argument("-k", type=_sci_int, required=True)
    p.add_argument("--out", required=True, help="output table path")

    p = sub.add_parser("estimate", help="run one estimator on files, print JSON")
    p.add_argument(
        "--estimator",
        required=True,
        choices=[e.value for e in EstimatorId],
    )
    p.add_argument("--x", help="source FASTA")
    p.add_argument("--y", help="mutated FASTA")
    p.add_argument("--x-reads", help="reads of the source")
    p.add_argument("--y-reads", help="reads of the mutated copy")
    p.add_argument("--x-table", help="source k-mer table")
    p.add_argument("--y-table", help="mutated k-mer table")
    p.add_argument("--record", type=_sci_int, default=None)
    p.add_argument("-k", type=_sci_int, default=None, help="k when counting from FASTA/reads")
    p.add_argument("--base", type=_base, default="auto", help="nucleotide for the single-base estimators")
    p.add_argument("--s", type=_sci_float, default=None, help="sequencer error rate (large-k-reads)")
    p.add_argument("--subset", type=_subset, default=None, help="general-k subset: all, top:M, explicit:...")
    p.add_argument(
        "--mode",
        choices=[m.value for m in Mode],
        default=None,
        help="assert the estimator's data regime (nonseq: full statistics, seq: reads)",
    )

    p = sub.add_parser("bounds", help="evaluate concentration bounds; prints a bare number")
    bsub = p.add_subparsers(dest="bound", required=True)

    b = bsub.add_parser("hoeffding", help="two-sided tail bound for a bounded sum")
    b.add_argument("--t", type=_sci_float, required=True, help="deviation")
    b.add_argument("--width", type=_sci_float, required=True, help="range width per term")
    b.add_argument("--n", type=_sci_int, required=True, help="number of terms")

    b = bsub.add_parser("mcdiarmid", help="two-sided tail bound under bounded differences")
    b.add_argument("--t", type=_sci_float, required=True)
    b.add_argument("--diff", type=_sci_float, required=True, help="bounded difference per input")
    b.add_argument("--n", type=_sci_int, required=True)

    b = bsub.add_parser("min-deviation", help="usable base-frequency deviation, whole sequences")
    b.add_argument("--rate", type=_sci_float, required=True)
    b.add_argument("--eps", type=_sci_float, required=True, help="target relative error")
    b.add_argument("--length", type=_sci_float, required=True)

    b = bsub.add_parser("required-deviation", help="required base-frequency deviation, reads")
    b.add_argument("--length", type=_sci_float, required=True)
    b.add_argument("--num-reads", type=_sci_float, required=True)
    b.add_argument("--rate", type=_sci_float, required=True)
    b.add_argument("--s", type=_sci_float, required=True, help="sequencer error rate")
    b.add_argument("--eps", type=_sci_float, required=True)
    bg = b.add_mutually_exclusive_group(required=True)
    bg.add_argument("--delta", type=_sci_float, help="total failure probability, split evenly")
    bg.add_argument("--budgets", type=_dist3, help="c1,c2,c3 exponents")

    b = bsub.add_parser("success", help="success probability under given exponents")
    bg = b.add_mutually_exclusive_group(required=True)
    bg.add_argument("--delta", type=_sci_float, help="total failure probability, split evenly")
    bg.add_argument("--budgets", type=_dist3, help="c1,c2,c3 exponents")

    p = sub.add_parser("experiment", help="run a Monte-Carlo sweep over a parameter grid")
    p.add_argument(
        "--mode",
        required=True,
        choices=[m.value for m in Mode],
        help="nonseq: estimators see full statistics; seq: estimators see noisy reads",
    )
    p.add_argument(
        "--estimators",
        type=_estimator_list,
        required=True,
        help="comma-separated estimator names",
    )
    p.add_argument("--p", type=_float_list, required=True, help="substitution rates, comma-separated")
    p.add_argument("--trials", type=_sci_int, required=True, help="trials per grid point")
    p.add_argument("--seed", type=_sci_int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--fasta", help="reference sequences from a FASTA file")
    group.add_argument("--length", type=_sci_int, help="i.i.d. reference length")
    p.add_argument("--dist", type=_dist, default=(0.25, 0.25, 0.25, 0.25))
    p.add_argument("--refs", type=_sci_int, default=1, help="number of i.i.d. references")
    p.add_argument("-k", type=_int_list, default=(1,), help="k values, comma-separated")
    p.add_argument(
        "--s",
        type=_float_list,
        default=None,
        help="sequencer error rates, comma-separated (seq mode; required for large-k-reads)",
    )
    p.add_argument(
        "--coverage",
        type=_float_list,
        default=(DEFAULT_COVERAGE,),
        help="coverages, comma-separated (seq mode)",
    )
    p.add_argument("--read-len", type=_sci_int, default=DEFAULT_READ_LEN)
    p.add_argument("--base", type=_base, default="auto")
    p.add_argument("--subset", type=_subset, default=None)
    p.add_argument("--y-coverage", type=_sci_float, default=None, help="mutated-side coverage override")
    p.add_argument("--y-read-len", type=_sci_int, default=None, help="mutated-side read length override")
    p.add_argument("--out-csv", default=None, help="write per-trial records here")
    p.add_argument("--out-json", default=None, help="write the summary here")

    return parser


def _dist3(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated exponents c1,c2,c3")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad exponent in {text!r}") from None


def _cmd_gen(args) -> int:
    seq = generate_iid_sequence(args.length, args.dist, args.seed)
    write_fasta(args.out, [FastaRecord(args.name, seq)])
    return 0


def _cmd_mutate(args) -> int:
    records = read_fasta(args.inp)
    channel = SubstitutionChannel(args.rate)
    out = [
        FastaRecord(rec.name, mutate(rec.seq, channel, derive_seed(args.seed, "record", i)))
        for i, rec in enumerate(records)
    ]
    write_fasta(args.out, out)
    return 0


def _cmd_reads(args) -> int:
    rec = _pick_record(read_fasta(args.inp), args.record, args.inp)
    g = len(rec.seq)
    if args.num_reads is not None:
        n = args.num_reads
    else:
        cov = args.coverage if args.coverage is not None else DEFAULT_COVERAGE
        n = int(round(cov * g / args.read_len))
    if n < 1:
        raise MutrateError(f"computed number of reads is {n}; raise coverage or --num-reads")
    rs = sample_reads(
        rec.seq,
        args.read_len,
        n,
        SubstitutionChannel(args.error_rate),
        args.seed,
        allow_wrap_repeat=args.allow_wrap,
    )
    write_reads(args.out, rs)
    return 0


def _cmd_count(args) -> int:
    if args.fasta:
        rec = _pick_record(read_fasta(args.fasta), args.record, args.fasta)
        table = count_kmers_sequence(rec.seq, args.k)
    else:
        rs = read_reads(args.reads)
        table = count_kmers_reads(rs, args.k)
    write_kmer_table(args.out, table)
    return 0


def _read_fraction(matrix: np.ndarray, code: int) -> int:
    return int(np.count_nonzero(matrix == code))


def _auto_base_from_matrix(matrix: np.ndarray) -> str:
    counts = np.bincount(matrix.reshape(-1), minlength=4)
    dev = np.abs(counts / max(matrix.size, 1) - 0.25)
    return ALPHABET[int(np.argmax(dev))]


def _cmd_estimate(args, parser: argparse.ArgumentParser) -> int:
    est = EstimatorId(args.estimator)
    if args.mode is not None:
        regime = "seq" if est in READ_BASED else "nonseq"
        if regime != args.mode:
            parser.error(f"--estimator {est.value} runs in {regime} mode, not {args.mode}")
    extras: dict = {}

    def need(flag_value, flag_name):
        if flag_value is None:
            parser.error(f"--estimator {est.value} requires {flag_name}")
        return flag_value

    if est in (EstimatorId.K1_SINGLE, EstimatorId.K1_GC):
        x_rec = _pick_record(read_fasta(need(args.x, "--x")), args.record, args.x)
        y_rec = _pick_record(read_fasta(need(args.y, "--y")), args.record, args.y)
        if est is EstimatorId.K1_GC:
            result = estimate_k1_gc(x_rec.seq.gc_fraction(), y_rec.seq.gc_fraction())
        else:
            base = args.base if args.base != "auto" else choose_k1_base(x_rec.seq)
            code = encode_base(base)
            f = int(np.count_nonzero(x_rec.seq.codes == code))
            f_prime = int(np.count_nonzero(y_rec.seq.codes == code))
            result = estimate_k1_single(f, f_prime, len(x_rec.seq))
            extras["base"] = base
    elif est is EstimatorId.K1_READS:
        xr = read_reads(need(args.x_reads, "--x-reads"))
        yr = read_reads(need(args.y_reads, "--y-reads"))
        if (xr.num_reads, xr.read_len) != (yr.num_reads, yr.read_len):
            raise MutrateError(
                "the single-base read estimator needs matching N and L on both sides"
            )
        base = args.base if args.base != "auto" else _auto_base_from_matrix(xr.matrix)
        code = encode_base(base)
        result = estimate_k1_reads(
            _read_fraction(xr.matrix, code),
            _read_fraction(yr.matrix, code),
            xr.num_reads,
            xr.read_len,
        )
        extras["base"] = base
    elif est in (EstimatorId.GENERAL_K, EstimatorId.LARGE_K_SEQ):
        if args.x_table:
            x_table = read_kmer_table(args.x_table)
        else:
            rec = _pick_record(read_fasta(need(args.x, "--x or --x-table")), args.record, args.x)
            x_table = count_kmers_sequence(rec.seq, need(args.k, "-k"))
        if args.y_table:
            y_table = read_kmer_table(args.y_table)
        else:
            rec = _pick_record(read_fasta(need(args.y, "--y or --y-table")), args.record, args.y)
            y_table = count_kmers_sequence(rec.seq, x_table.k)
        if est is EstimatorId.GENERAL_K:
            result = estimate_general_k(x_table, y_table, args.subset)
        else:
            result = estimate_large_k_seq(x_table, y_table)
    else:  # large-k-reads
        s = args.s
        if s is None:
            parser.error("--estimator large-k-reads requires --s (sequencer error rate)")
        scale = 1.0
        if args.x_table:
            x_table = read_kmer_table(args.x_table)
        else:
            xr = read_reads(need(args.x_reads, "--x-reads or --x-table"))
            x_table = count_kmers_reads(xr, need(args.k, "-k"))
        k = x_table.k
        if args.y_table:
            y_table = read_kmer_table(args.y_table)
        else:
            yr = read_reads(need(args.y_reads, "--y-reads or --y-table"))
            y_table = count_kmers_reads(yr, k)
            if args.x_table is None:
                scale = (xr.num_reads * (xr.read_len - k + 1)) / (
                    yr.num_reads * (yr.read_len - k + 1)
                )
        result = estimate_large_k_reads(x_table, y_table, s, mutated_scale=scale)

    print(json.dumps(_result_to_dict(result, extras), indent=2))
    return 0


def _result_to_dict(result: EstimateResult, extras: dict) -> dict:
    d = result.diagnostics
    out = {
        "estimator": result.estimator.value,
        "p_raw": result.p_raw,
        "p_clamped": result.p_clamped,
        **extras,
        "warnings": list(result.warnings),
        "diagnostics": {},
    }
    if d.lambda_threshold is not None:
        out["diagnostics"]["lambda_threshold"] = d.lambda_threshold
        out["diagnostics"]["lambda_fallback"] = d.lambda_fallback
    if d.retained_mass is not None:
        out["diagnostics"]["retained_mass"] = d.retained_mass
    if d.root_bracket is not None:
        out["diagnostics"]["root_bracket"] = list(d.root_bracket)
        out["diagnostics"]["multiple_roots"] = d.multiple_roots
    return out


def _cmd_bounds(args) -> int:
    if args.bound == "hoeffding":
        value = bounds_mod.hoeffding_tail(args.t, args.width, args.n)
    elif args.bound == "mcdiarmid":
        value = bounds_mod.mcdiarmid_tail(args.t, args.diff, args.n)
    elif args.bound == "min-deviation":
        value = bounds_mod.min_deviation_sequence(args.rate, args.eps, args.length)
    elif args.bound == "required-deviation":
        budgets = (
            bounds_mod.equal_budgets(args.delta)
            if args.delta is not None
            else bounds_mod.Budgets(*args.budgets)
        )
        params = bounds_mod.ReadBoundParams(
            seq_len=args.length,
            num_reads=args.num_reads,
            rate=args.rate,
            error_rate=args.s,
            rel_tol=args.eps,
        )
        value = bounds_mod.required_deviation_reads(params, budgets)
    else:  # success
        budgets = (
            bounds_mod.equal_budgets(args.delta)
            if args.delta is not None
            else bounds_mod.Budgets(*args.budgets)
        )
        value = bounds_mod.success_probability(budgets)
    print(repr(value))
    return 0


def _cmd_experiment(args, parser: argparse.ArgumentParser) -> int:
    if EstimatorId.LARGE_K_READS in args.estimators and args.s is None:
        # s=0 is legitimate, but for this estimator it must be a decision
        parser.error("large-k-reads requires an explicit --s")
    if args.fasta:
        source: IidSource | FastaSource = FastaSource(args.fasta)
    else:
        if args.length is None:
            parser.error("one of --fasta or --length is required")
        source = IidSource(args.length, args.dist, args.refs)
    try:
        config = ExperimentConfig(
            source=source,
            mode=Mode(args.mode),
            estimators=args.estimators,
            p_grid=args.p,
            trials_per_point=args.trials,
            master_seed=args.seed,
            k_values=args.k,
            s_grid=args.s if args.s is not None else (0.0,),
            coverage_grid=args.coverage,
            read_len=args.read_len,
            k1_base=args.base,
            subset=args.subset,
            y_coverage=args.y_coverage,
            y_read_len=args.y_read_len,
        )
    except ValueError as exc:
        parser.error(str(exc))
    records = run_experiment(config)
    if args.out_csv:
        write_trials_csv(args.out_csv, records)
    if args.out_json:
        write_summary_json(args.out_json, config, records)
    print(json.dumps(summary_to_dict(config, records)["groups"], indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "mutate":
            return _cmd_mutate(args)
        if args.command == "reads":
            return _cmd_reads(args)
        if args.command == "count":
            return _cmd_count(args)
        if args.command == "estimate":
            return _cmd_estimate(args, parser)
        if args.command == "bounds":
            return _cmd_bounds(args)
        if args.command == "experiment":
            return _cmd_experiment(args, parser)
        parser.error(f"unknown command {args.command!r}")
    except (MutrateError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
