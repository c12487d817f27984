"""
Streaming FASTA/FASTQ reading and canonical writing.

Parsing is a single pass over the input lines; only the set of ids seen so
far is kept, for duplicate detection. Output is canonical: one base line per
record, LF line endings, FASTQ quality at ASCII offset 33.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path
import re
from typing import IO, BinaryIO

from seqpipe.const import FASTA_SUFFIXES, FASTQ_SUFFIXES, FORMAT_FASTA, FORMAT_FASTQ, PHRED_MAX, PHRED_OFFSET
from seqpipe.exceptions import DuplicateRecordError, SequenceFormatError

_BASES = re.compile(r"^[ACGTNacgtn]*$")


@dataclass(frozen=True, slots=True)
class SequenceRecord:
    """One read or contig."""

    id: str
    bases: str
    description: str = ""
    quality: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        """Check the record invariants."""
        if not self.id or any(ch.isspace() for ch in self.id):
            raise SequenceFormatError(f"invalid record id {self.id!r}", error_key="sequence_bad_id")
        if not _BASES.match(self.bases):
            raise SequenceFormatError(f"record {self.id}: bases outside ACGTN", error_key="sequence_bad_bases")
        if self.quality is not None:
            if len(self.quality) != len(self.bases):
                raise SequenceFormatError(
                    f"record {self.id}: {len(self.quality)} quality values for {len(self.bases)} bases",
                    error_key="sequence_quality_length",
                )
            if any(q < 0 or q > PHRED_MAX for q in self.quality):
                raise SequenceFormatError(
                    f"record {self.id}: quality outside 0..{PHRED_MAX}", error_key="sequence_quality_range"
                )

    def __len__(self) -> int:
        """Return the number of bases."""
        return len(self.bases)

    @property
    def header(self) -> str:
        """Id and description as written after the ``>``/``@`` marker."""
        return f"{self.id} {self.description}" if self.description else self.id


def detect_format(path: Path | str, first_byte: bytes | None = None) -> str:
    """
    Infer FASTA or FASTQ from a file suffix, falling back to the first byte.

    Raises:
        SequenceFormatError: Neither the suffix nor the content identify the format.
    """
    suffixes = [suffix.lower() for suffix in Path(path).suffixes if suffix.lower() != ".gz"]
    suffix = suffixes[-1] if suffixes else ""
    if suffix in FASTA_SUFFIXES:
        return FORMAT_FASTA
    if suffix in FASTQ_SUFFIXES:
        return FORMAT_FASTQ

    if first_byte is None and Path(path).is_file():
        with Path(path).open("rb") as handle:
            first_byte = handle.read(1)
    if first_byte == b">":
        return FORMAT_FASTA
    if first_byte == b"@":
        return FORMAT_FASTQ
    raise SequenceFormatError(f"cannot tell the sequence format of {path}", error_key="sequence_format_unknown")


def _iter_lines(stream: Iterable[bytes] | Iterable[str]) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, line without line ending)."""
    for number, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            try:
                line = raw.decode("ascii")
            except UnicodeDecodeError as exc:
                raise SequenceFormatError(
                    f"non-ASCII byte 0x{raw[exc.start]:02x} at column {exc.start + 1}",
                    line=number,
                    error_key="sequence_encoding",
                ) from None
        else:
            line = raw
        yield number, line.rstrip("\r\n")


def _split_header(line: str, number: int) -> tuple[str, str]:
    """Split a header (marker already removed) into id and description."""
    parts = line.split(None, 1)
    if not parts:
        raise SequenceFormatError("header without id", line=number, error_key="sequence_bad_id")
    return parts[0], parts[1].strip() if len(parts) == 2 else ""


def _make_record(
    number: int,
    record_id: str,
    description: str,
    bases: str,
    quality: tuple[int, ...] | None,
) -> SequenceRecord:
    """Build a record, reporting invariant violations at the given line."""
    try:
        return SequenceRecord(id=record_id, bases=bases, description=description, quality=quality)
    except SequenceFormatError as exc:
        raise SequenceFormatError(str(exc), line=number, error_key=exc.error_key) from exc


def _parse_fasta(lines: Iterator[tuple[int, str]]) -> Iterator[SequenceRecord]:
    header: tuple[str, str] | None = None
    header_line = 0
    chunks: list[str] = []
    for number, line in lines:
        if not line.strip():
            continue
        if line.startswith(">"):
            if header is not None:
                yield _make_record(header_line, header[0], header[1], "".join(chunks), None)
            header = _split_header(line[1:], number)
            header_line = number
            chunks = []
        elif header is None:
            raise SequenceFormatError("sequence data before the first '>' header", line=number)
        else:
            chunks.append(line.strip())
    if header is not None:
        yield _make_record(header_line, header[0], header[1], "".join(chunks), None)


def _decode_quality(line: str, number: int) -> tuple[int, ...]:
    scores = tuple(ord(ch) - PHRED_OFFSET for ch in line)
    if any(score < 0 or score > PHRED_MAX for score in scores):
        raise SequenceFormatError("quality character outside the Phred+33 range", line=number)
    return scores


def _parse_fastq(lines: Iterator[tuple[int, str]]) -> Iterator[SequenceRecord]:
    last_line = 0
    while True:
        # Skip blank lines between records
        for number, line in lines:
            last_line = number
            if line.strip():
                header_number, header = number, line
                break
        else:
            return

        if not header.startswith("@"):
            raise SequenceFormatError("expected '@' header", line=header_number)
        record_id, description = _split_header(header[1:], header_number)

        rest: list[tuple[int, str]] = []
        for number, line in lines:
            last_line = number
            rest.append((number, line))
            if len(rest) == 3:
                break
        if len(rest) < 3:
            raise SequenceFormatError(
                f"record {record_id} is truncated ({len(rest) + 1} of 4 lines)",
                line=last_line + 1 if rest else header_number + 1,
                error_key="sequence_truncated",
            )

        (_, bases), (plus_number, plus), (quality_number, quality_line) = rest
        if not plus.startswith("+"):
            raise SequenceFormatError("expected '+' separator line", line=plus_number)
        if len(quality_line) != len(bases):
            raise SequenceFormatError(
                f"record {record_id}: {len(quality_line)} quality values for {len(bases)} bases",
                line=quality_number,
                error_key="sequence_quality_length",
            )
        yield _make_record(header_number, record_id, description, bases, _decode_quality(quality_line, quality_number))


def parse_sequences(stream: Iterable[bytes] | Iterable[str], fmt: str) -> Iterator[SequenceRecord]:
    """
    Stream records from a FASTA or FASTQ source.

    Args:
        stream: Binary or text lines (an open file works).
        fmt: ``fasta`` or ``fastq``.

    Yields:
        Records in input order; ids are the header text up to the first whitespace.

    Raises:
        SequenceFormatError: Malformed record (with its line number).
        DuplicateRecordError: An id occurs twice.
    """
    if fmt == FORMAT_FASTA:
        records = _parse_fasta(_iter_lines(stream))
    elif fmt == FORMAT_FASTQ:
        records = _parse_fastq(_iter_lines(stream))
    else:
        raise SequenceFormatError(f"unknown sequence format {fmt!r}", error_key="sequence_format_unknown")

    seen: set[str] = set()
    for record in records:
        if record.id in seen:
            raise DuplicateRecordError(f"duplicate record id {record.id}")
        seen.add(record.id)
        yield record


def format_record(record: SequenceRecord, fmt: str) -> bytes:
    """
    Render one record in canonical form.

    Raises:
        SequenceFormatError: FASTQ requested for a record without quality.
    """
    if fmt == FORMAT_FASTA:
        return f">{record.header}\n{record.bases}\n".encode("ascii")
    if fmt == FORMAT_FASTQ:
        if record.quality is None:
            raise SequenceFormatError(
                f"record {record.id} has no quality and cannot be written as FASTQ",
                error_key="sequence_no_quality",
            )
        quality = "".join(chr(q + PHRED_OFFSET) for q in record.quality)
        return f"@{record.header}\n{record.bases}\n+\n{quality}\n".encode("ascii")
    raise SequenceFormatError(f"unknown sequence format {fmt!r}", error_key="sequence_format_unknown")


def write_sequences(records: Iterable[SequenceRecord], fmt: str, stream: BinaryIO | IO[bytes]) -> int:
    """
    Write records to a binary stream in canonical form.

    Returns:
        The number of records written.
    """
    count = 0
    for record in records:
        stream.write(format_record(record, fmt))
        count += 1
    return count


def sequences_to_bytes(records: Iterable[SequenceRecord], fmt: str) -> bytes:
    """Render records in canonical form; an empty input gives ``b""``."""
    return b"".join(format_record(record, fmt) for record in records)


def read_sequence_file(path: Path | str, fmt: str | None = None) -> Iterator[SequenceRecord]:
    """Stream records from a file, inferring the format when not given."""
    path = Path(path)
    fmt = fmt or detect_format(path)
    with path.open("rb") as handle:
        yield from parse_sequences(handle, fmt)


def write_sequence_file(path: Path | str, records: Iterable[SequenceRecord], fmt: str) -> int:
    """Write records to a file in canonical form; returns the record count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        return write_sequences(records, fmt, handle)
