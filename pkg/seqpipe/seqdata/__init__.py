"""Sequence data handling: FASTA/FASTQ I/O, filters and scatter/gather partitioning."""

from __future__ import annotations

from .filters import (
    FilterParams,
    FilterReport,
    length_cutoff_filter,
    mask_records,
    mean_quality,
    n_fraction,
    quality_filter,
    rejection_reason,
    resolve_length_cutoff,
)
from .partition import Partition, expected_partition_size, merge_parts, read_partition, split_records
from .records import (
    SequenceRecord,
    detect_format,
    format_record,
    parse_sequences,
    read_sequence_file,
    sequences_to_bytes,
    write_sequence_file,
    write_sequences,
)

__all__ = [
    "FilterParams",
    "FilterReport",
    "Partition",
    "SequenceRecord",
    "detect_format",
    "expected_partition_size",
    "format_record",
    "length_cutoff_filter",
    "mask_records",
    "mean_quality",
    "merge_parts",
    "n_fraction",
    "parse_sequences",
    "quality_filter",
    "read_partition",
    "read_sequence_file",
    "rejection_reason",
    "resolve_length_cutoff",
    "sequences_to_bytes",
    "split_records",
    "write_sequence_file",
    "write_sequences",
]
