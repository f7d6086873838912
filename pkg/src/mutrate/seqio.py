"""File formats: FASTA in/out, k-mer count tables, and read sets.

All formats are plain text. The two tabular formats carry a single
tab-separated header line of ``#key=value`` fields that pins the parameters
needed to interpret the rows; readers verify the rows against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FastaParseError
from .kmers import KmerTable, encode_kmer
from .model import CircularSequence, ReadSet, codes_to_string, string_to_codes

FASTA_LINE_WIDTH = 70


@dataclass(frozen=True)
class FastaRecord:
    """One named sequence. ``dropped`` counts symbols removed in drop mode."""

    name: str
    seq: CircularSequence
    dropped: int = 0


def parse_fasta(text: str, on_invalid: str = "error") -> list[FastaRecord]:
    """Parse FASTA text into records.

    ``on_invalid`` controls non-ACGT symbols in sequence lines: ``"error"``
    (default) raises with the line and column, ``"drop"`` removes them and
    counts removals per record. Case is folded; blank lines are skipped.
    """
    if on_invalid not in ("error", "drop"):
        raise ValueError(f"on_invalid must be 'error' or 'drop', got {on_invalid!r}")
    records: list[FastaRecord] = []
    name: str | None = None
    chunks: list[str] = []
    dropped = 0

    def flush():
        nonlocal name, chunks, dropped
        if name is None:
            return
        seq_text = "".join(chunks)
        if not seq_text:
            raise FastaParseError(f"record {name!r} has an empty sequence")
        records.append(FastaRecord(name, CircularSequence.from_string(seq_text), dropped))
        name, chunks, dropped = None, [], 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            flush()
            name = line[1:].strip()
            if not name:
                raise FastaParseError(f"line {lineno}: header has no name")
            continue
        if name is None:
            raise FastaParseError(f"line {lineno}: sequence data before any '>' header")
        kept = []
        for col, ch in enumerate(line, start=1):
            if ch.upper() in "ACGT":
                kept.append(ch)
            elif on_invalid == "error":
                raise FastaParseError(
                    f"line {lineno}, column {col}: invalid symbol {ch!r}"
                )
            else:
                dropped += 1
        chunks.append("".join(kept))
    flush()
    if not records:
        raise FastaParseError("no records found")
    return records


def read_fasta(path: str | Path, on_invalid: str = "error") -> list[FastaRecord]:
    return parse_fasta(Path(path).read_text(), on_invalid)


def write_fasta(path: str | Path, records: list[FastaRecord] | list[tuple[str, CircularSequence]]) -> None:
    lines = []
    for rec in records:
        if isinstance(rec, FastaRecord):
            name, seq = rec.name, rec.seq
        else:
            name, seq = rec
        lines.append(f">{name}")
        text = seq.to_string()
        for i in range(0, len(text), FASTA_LINE_WIDTH):
            lines.append(text[i : i + FASTA_LINE_WIDTH])
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_header(line: str, expected_keys: tuple[str, ...], where: str) -> dict[str, str]:
    fields = line.rstrip("\n").split("\t")
    if len(fields) != len(expected_keys):
        raise ValueError(
            f"{where}: header must have fields {expected_keys}, got {len(fields)} fields"
        )
    out = {}
    for field, key in zip(fields, expected_keys):
        prefix = f"#{key}="
        if not field.startswith(prefix):
            raise ValueError(f"{where}: expected header field {prefix}<value>, got {field!r}")
        out[key] = field[len(prefix) :]
    return out


# --- k-mer count tables -----------------------------------------------------


def write_kmer_table(path: str | Path, table: KmerTable) -> None:
    """One header line ``#k=<k>\\t#total=<total>\\t#provenance=<...>``, then
    tab-separated (k-mer, count) rows in packed-key order."""
    lines = [f"#k={table.k}\t#total={table.total}\t#provenance={table.provenance}"]
    for kmer, count in table.items():
        lines.append(f"{kmer}\t{count}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_kmer_table(path: str | Path) -> KmerTable:
    path = Path(path)
    with path.open() as fh:
        header_line = fh.readline()
        if not header_line:
            raise ValueError(f"{path}: empty file")
        header = _parse_header(header_line, ("k", "total", "provenance"), str(path))
        try:
            k = int(header["k"])
            total = int(header["total"])
        except ValueError:
            raise ValueError(f"{path}: k and total must be integers") from None
        provenance = header["provenance"]
        if provenance not in ("sequence", "reads"):
            raise ValueError(f"{path}: provenance must be 'sequence' or 'reads', got {provenance!r}")
        keys = []
        counts = []
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}, line {lineno}: expected 'KMER\\tCOUNT'")
            kmer, count_text = parts
            if len(kmer) != k:
                raise ValueError(
                    f"{path}, line {lineno}: k-mer {kmer!r} has length {len(kmer)}, header says k={k}"
                )
            try:
                count = int(count_text)
            except ValueError:
                raise ValueError(f"{path}, line {lineno}: count {count_text!r} is not an integer") from None
            if count <= 0:
                raise ValueError(f"{path}, line {lineno}: count must be positive, got {count}")
            try:
                keys.append(encode_kmer(kmer))
            except ValueError as exc:
                raise ValueError(f"{path}, line {lineno}: {exc}") from None
            counts.append(count)
    keys_arr = np.array(keys, dtype=np.uint64) if keys else np.empty(0, dtype=np.uint64)
    counts_arr = np.array(counts, dtype=np.int64) if counts else np.empty(0, dtype=np.int64)
    table = KmerTable(k, keys_arr, counts_arr, provenance)
    if table.total != total:
        raise ValueError(f"{path}: header total {total} but rows sum to {table.total}")
    return table


# --- read sets ---------------------------------------------------------------


def write_reads(path: str | Path, reads: ReadSet) -> None:
    """One header line ``#L=<L>\\t#N=<N>\\t#G=<G>``, then one read per line.

    Start positions are deliberately not stored: consumers must work from
    read content alone.
    """
    lines = [f"#L={reads.read_len}\t#N={reads.num_reads}\t#G={reads.source_len}"]
    for i in range(reads.num_reads):
        lines.append(codes_to_string(reads.matrix[i]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_reads(path: str | Path) -> ReadSet:
    path = Path(path)
    with path.open() as fh:
        header_line = fh.readline()
        if not header_line:
            raise ValueError(f"{path}: empty file")
        header = _parse_header(header_line, ("L", "N", "G"), str(path))
        try:
            L = int(header["L"])
            N = int(header["N"])
            G = int(header["G"])
        except ValueError:
            raise ValueError(f"{path}: L, N, G must be integers") from None
        if L < 1 or N < 0 or G < 1:
            raise ValueError(f"{path}: need L >= 1, N >= 0, G >= 1")
        matrix = np.empty((N, L), dtype=np.uint8)
        n_seen = 0
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            if n_seen >= N:
                raise ValueError(f"{path}, line {lineno}: more than N={N} reads")
            if len(line) != L:
                raise ValueError(
                    f"{path}, line {lineno}: read length {len(line)} but header says L={L}"
                )
            try:
                matrix[n_seen] = string_to_codes(line)
            except ValueError as exc:
                raise ValueError(f"{path}, line {lineno}: {exc}") from None
            n_seen += 1
    if n_seen != N:
        raise ValueError(f"{path}: header says N={N} reads but found {n_seen}")
    return ReadSet(matrix, G)
