"""Tests for FASTA/FASTQ parsing and canonical writing."""

from __future__ import annotations

import io

import pytest

from seqpipe.exceptions import DuplicateRecordError, SequenceFormatError
from seqpipe.seqdata.records import (
    SequenceRecord,
    detect_format,
    parse_sequences,
    read_sequence_file,
    sequences_to_bytes,
    write_sequence_file,
)

pytestmark = pytest.mark.unit


def test_parse_fastq_records() -> None:
    data = b"@r1 first read\nACGT\n+\nIIII\n@r2\nNN\n+r2\n!!\n"
    records = list(parse_sequences(io.BytesIO(data), "fastq"))

    assert [record.id for record in records] == ["r1", "r2"]
    assert records[0].description == "first read"
    assert records[0].quality == (40, 40, 40, 40)
    assert records[1].quality == (0, 0)


def test_parse_multiline_fasta_is_joined() -> None:
    data = ">c1 contig one\nACGT\nAC\n\n>c2\nGG\n"
    records = list(parse_sequences(io.StringIO(data), "fasta"))

    assert [(record.id, record.bases) for record in records] == [("c1", "ACGTAC"), ("c2", "GG")]
    assert records[0].quality is None


def test_crlf_line_endings_are_accepted() -> None:
    records = list(parse_sequences(io.BytesIO(b"@r1\r\nAC\r\n+\r\nII\r\n"), "fastq"))
    assert records == [SequenceRecord(id="r1", bases="AC", quality=(40, 40))]


@pytest.mark.parametrize("fmt", ["fasta", "fastq"])
def test_canonical_parse_write_identity(make_records, fmt: str) -> None:
    records = make_records(50, seed=3, with_quality=fmt == "fastq")
    canonical = sequences_to_bytes(records, fmt)

    assert list(parse_sequences(io.BytesIO(canonical), fmt)) == records
    assert sequences_to_bytes(parse_sequences(io.BytesIO(canonical), fmt), fmt) == canonical


def test_empty_input_gives_no_records() -> None:
    assert list(parse_sequences(io.BytesIO(b""), "fastq")) == []
    assert sequences_to_bytes([], "fasta") == b""


def test_truncated_fastq_reports_line() -> None:
    with pytest.raises(SequenceFormatError) as err:
        list(parse_sequences(io.BytesIO(b"@r1\nACGT\n+\nIIII\n@r2\nACGT\n"), "fastq"))
    assert err.value.error_key == "sequence_truncated"
    assert err.value.line is not None


def test_quality_length_mismatch() -> None:
    with pytest.raises(SequenceFormatError) as err:
        list(parse_sequences(io.BytesIO(b"@r1\nACGT\n+\nIII\n"), "fastq"))
    assert err.value.error_key == "sequence_quality_length"
    assert err.value.line == 4


def test_invalid_bases_rejected_with_line() -> None:
    with pytest.raises(SequenceFormatError) as err:
        list(parse_sequences(io.StringIO(">c1\nACGT\n>c2\nACXT\n"), "fasta"))
    assert err.value.line == 3


def test_non_ascii_bytes_reported_with_line() -> None:
    with pytest.raises(SequenceFormatError) as err:
        list(parse_sequences(io.BytesIO(b">c1\nACGT\n>c2 caf\xc3\xa9\nAC\n"), "fasta"))
    assert err.value.error_key == "sequence_encoding"
    assert err.value.line == 3
    assert "0xc3" in str(err.value)


def test_sequence_before_header() -> None:
    with pytest.raises(SequenceFormatError):
        list(parse_sequences(io.StringIO("ACGT\n>c1\nAC\n"), "fasta"))


def test_duplicate_ids_rejected() -> None:
    with pytest.raises(DuplicateRecordError):
        list(parse_sequences(io.StringIO(">a\nAC\n>a\nGT\n"), "fasta"))


def test_fastq_output_requires_quality() -> None:
    with pytest.raises(SequenceFormatError) as err:
        sequences_to_bytes([SequenceRecord(id="c1", bases="AC")], "fastq")
    assert err.value.error_key == "sequence_no_quality"


@pytest.mark.parametrize(
    ("name", "first_byte", "expected"),
    [
        ("reads.fastq", None, "fastq"),
        ("reads.FQ", None, "fastq"),
        ("contigs.fna", None, "fasta"),
        ("contigs.fa.gz", None, "fasta"),
        ("data.txt", b">", "fasta"),
        ("data.txt", b"@", "fastq"),
    ],
)
def test_detect_format(name: str, first_byte: bytes | None, expected: str) -> None:
    assert detect_format(name, first_byte) == expected


def test_detect_format_unknown() -> None:
    with pytest.raises(SequenceFormatError):
        detect_format("data.txt", b"#")


def test_file_round_trip(tmp_path, make_records) -> None:
    records = make_records(10, seed=1)
    path = tmp_path / "nested" / "reads.fastq"

    assert write_sequence_file(path, records, "fastq") == 10
    assert list(read_sequence_file(path)) == records
