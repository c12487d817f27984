"""
Record-boundary-aware scatter/gather.

Records are dealt round-robin: record ``j`` goes to partition ``j mod n``.
Partition sizes differ by at most one, and interleaving the partitions back
restores the original order exactly.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from seqpipe.exceptions import PartitionError
from seqpipe.seqdata.records import SequenceRecord, read_sequence_file


@dataclass(frozen=True, slots=True)
class Partition:
    """One share of a split dataset."""

    index: int
    n_parts: int
    records: tuple[SequenceRecord, ...]

    def __post_init__(self) -> None:
        """Check the index bounds."""
        if not 0 <= self.index < self.n_parts:
            raise PartitionError(f"partition index {self.index} outside [0, {self.n_parts})")


def expected_partition_size(n_records: int, n_parts: int, index: int) -> int:
    """Number of records partition ``index`` receives when ``n_records`` are split."""
    return max(0, (n_records - index + n_parts - 1) // n_parts)


def split_records(records: Iterable[SequenceRecord], n_parts: int) -> list[Partition]:
    """
    Split records into ``n_parts`` count-balanced partitions.

    Raises:
        PartitionError: ``n_parts`` is below 1.
    """
    if n_parts < 1:
        raise PartitionError(f"n_parts must be >= 1, got {n_parts}", error_key="partition_count")

    buckets: list[list[SequenceRecord]] = [[] for _ in range(n_parts)]
    for position, record in enumerate(records):
        buckets[position % n_parts].append(record)
    return [Partition(index=index, n_parts=n_parts, records=tuple(bucket)) for index, bucket in enumerate(buckets)]


def merge_parts(partitions: Sequence[Partition]) -> list[SequenceRecord]:
    """
    Interleave partitions back into dataset order.

    Raises:
        PartitionError: No partitions, mixed ``n_parts``, duplicate or missing
            indices, or sizes that a round-robin split cannot have produced.
    """
    if not partitions:
        raise PartitionError("no partitions to merge", error_key="partition_missing")

    n_parts = partitions[0].n_parts
    if any(partition.n_parts != n_parts for partition in partitions):
        raise PartitionError("partitions disagree on n_parts", error_key="partition_mismatch")

    by_index: dict[int, Partition] = {}
    for partition in partitions:
        if partition.index in by_index:
            raise PartitionError(f"duplicate partition index {partition.index}", error_key="partition_duplicate")
        by_index[partition.index] = partition

    missing = [index for index in range(n_parts) if index not in by_index]
    if missing:
        raise PartitionError(
            f"missing partition index {', '.join(map(str, missing))}",
            error_key="partition_missing",
            placeholders={"missing": missing},
        )

    ordered = [by_index[index] for index in range(n_parts)]
    total = sum(len(partition.records) for partition in ordered)
    for partition in ordered:
        if len(partition.records) != expected_partition_size(total, n_parts, partition.index):
            raise PartitionError(
                f"partition {partition.index} has {len(partition.records)} records, "
                f"expected {expected_partition_size(total, n_parts, partition.index)}",
                error_key="partition_size",
            )

    return [ordered[position % n_parts].records[position // n_parts] for position in range(total)]


def read_partition(path: Path | str, index: int, n_parts: int, fmt: str | None = None) -> Partition:
    """Load a partition file written during scatter."""
    return Partition(index=index, n_parts=n_parts, records=tuple(read_sequence_file(path, fmt)))
