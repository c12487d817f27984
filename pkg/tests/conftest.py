"""Shared fixtures for seqpipe tests."""

from __future__ import annotations

from collections.abc import Callable, Iterator
import logging
import random

import pytest

from seqpipe.const import LOGGER
from seqpipe.seqdata.records import SequenceRecord
from seqpipe.taxonomy.tree import TaxonomyTree, build_taxonomy

# child, parent
SMALL_TAXONOMY = (
    ("1", None),
    ("2", "1"),
    ("3", "1"),
    ("4", "2"),
    ("5", "2"),
    ("6", "3"),
    ("7", "4"),
    ("8", "4"),
)


@pytest.fixture
def taxonomy() -> TaxonomyTree:
    """
    Eight-node tree.

        1
        ├── 2
        │   ├── 4
        │   │   ├── 7
        │   │   └── 8
        │   └── 5
        └── 3
            └── 6
    """
    return build_taxonomy(SMALL_TAXONOMY)


@pytest.fixture
def make_records() -> Callable[..., list[SequenceRecord]]:
    """Factory for random, valid FASTQ-ready records with unique ids."""

    def _make(count: int, *, seed: int = 0, with_quality: bool = True) -> list[SequenceRecord]:
        rng = random.Random(seed)
        records = []
        for index in range(count):
            length = rng.randint(0, 40)
            bases = "".join(rng.choice("ACGTN") for _ in range(length))
            quality = tuple(rng.randint(0, 41) for _ in range(length)) if with_quality else None
            description = f"sample={index % 3}" if index % 2 else ""
            records.append(SequenceRecord(id=f"r{index}", bases=bases, description=description, quality=quality))
        return records

    return _make


@pytest.fixture(autouse=True)
def reset_logger() -> Iterator[None]:
    """Drop handlers the CLI installs; they point at captured streams."""
    yield
    for handler in list(LOGGER.handlers):
        LOGGER.removeHandler(handler)
    LOGGER.setLevel(logging.NOTSET)
