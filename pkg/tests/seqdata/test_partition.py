"""Tests for scatter/gather partitioning."""

from __future__ import annotations

import random

import pytest

from seqpipe.exceptions import PartitionError
from seqpipe.seqdata.partition import Partition, merge_parts, read_partition, split_records
from seqpipe.seqdata.records import SequenceRecord, write_sequence_file

pytestmark = pytest.mark.unit


def _records(count: int) -> list[SequenceRecord]:
    return [SequenceRecord(id=f"r{index}", bases="ACGT"[: index % 4]) for index in range(count)]


@pytest.mark.parametrize("n_parts", range(1, 18))
def test_merge_of_split_is_identity(n_parts: int) -> None:
    rng = random.Random(n_parts)
    records = _records(rng.randint(0, 10_000 // n_parts))

    partitions = split_records(records, n_parts)

    assert len(partitions) == n_parts
    sizes = [len(partition.records) for partition in partitions]
    assert max(sizes) - min(sizes) <= 1
    assert merge_parts(partitions) == records


def test_merge_accepts_any_partition_order() -> None:
    records = _records(11)
    partitions = split_records(records, 4)
    assert merge_parts(list(reversed(partitions))) == records


def test_more_parts_than_records_gives_empty_partitions() -> None:
    partitions = split_records(_records(2), 5)
    assert [len(partition.records) for partition in partitions] == [1, 1, 0, 0, 0]


def test_split_rejects_zero_parts() -> None:
    with pytest.raises(PartitionError):
        split_records(_records(3), 0)


def test_merge_missing_partition() -> None:
    partitions = split_records(_records(9), 3)
    with pytest.raises(PartitionError) as err:
        merge_parts(partitions[:2])
    assert err.value.error_key == "partition_missing"
    assert err.value.placeholders["missing"] == [2]


def test_merge_duplicate_partition() -> None:
    partitions = split_records(_records(9), 3)
    with pytest.raises(PartitionError) as err:
        merge_parts([*partitions, partitions[0]])
    assert err.value.error_key == "partition_duplicate"


def test_merge_rejects_impossible_sizes() -> None:
    records = tuple(_records(4))
    partitions = [Partition(0, 2, records[:1]), Partition(1, 2, records[1:])]
    with pytest.raises(PartitionError) as err:
        merge_parts(partitions)
    assert err.value.error_key == "partition_size"


def test_partition_index_bounds() -> None:
    with pytest.raises(PartitionError):
        Partition(index=3, n_parts=3, records=())


def test_read_partition_from_file(tmp_path) -> None:
    records = _records(7)
    paths = []
    for partition in split_records(records, 3):
        path = tmp_path / f"part_{partition.index}.fasta"
        write_sequence_file(path, partition.records, "fasta")
        paths.append(path)

    partitions = [read_partition(path, index, 3) for index, path in enumerate(paths)]

    assert merge_parts(partitions) == records
