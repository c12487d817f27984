"""Quality, length and id-based record filters."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

from seqpipe.const import (
    DATASET_SIZE_CUTOFFS,
    LOGGER,
    PHRED_MAX,
    REJECT_LENGTH,
    REJECT_MEAN_QUALITY,
    REJECT_N_FRACTION,
)
from seqpipe.seqdata.records import SequenceRecord


@dataclass(frozen=True, slots=True)
class FilterParams:
    """Thresholds for :func:`quality_filter`."""

    min_length: int = 0
    min_mean_quality: float = 0.0
    max_n_fraction: float = 1.0

    def __post_init__(self) -> None:
        """Check the parameter bounds."""
        if self.min_length < 0:
            raise ValueError("min_length must be >= 0")
        if not 0 <= self.min_mean_quality <= PHRED_MAX:
            raise ValueError(f"min_mean_quality must be within [0, {PHRED_MAX}]")
        if not 0 <= self.max_n_fraction <= 1:
            raise ValueError("max_n_fraction must be within [0, 1]")


@dataclass(slots=True)
class FilterReport:
    """Counts of a filter run, rejected records keyed by first failing criterion."""

    total: int = 0
    kept: int = 0
    rejected: dict[str, int] = field(
        default_factory=lambda: {REJECT_LENGTH: 0, REJECT_N_FRACTION: 0, REJECT_MEAN_QUALITY: 0}
    )

    @property
    def rejected_total(self) -> int:
        """Number of records dropped for any reason."""
        return sum(self.rejected.values())


def n_fraction(record: SequenceRecord) -> float:
    """Fraction of ambiguous (N) bases; 0 for an empty record."""
    if not record.bases:
        return 0.0
    return (record.bases.count("N") + record.bases.count("n")) / len(record.bases)


def mean_quality(record: SequenceRecord) -> float | None:
    """Mean Phred score, or None when the record has no (or empty) quality."""
    if not record.quality:
        return None
    return sum(record.quality) / len(record.quality)


def rejection_reason(record: SequenceRecord, params: FilterParams) -> str | None:
    """
    Return the first criterion a record fails, or None if it passes.

    Criteria are checked in the order length, N-fraction, mean quality.
    Records without quality pass the quality criterion.
    """
    if len(record) < params.min_length:
        return REJECT_LENGTH
    if n_fraction(record) > params.max_n_fraction:
        return REJECT_N_FRACTION
    mean = mean_quality(record)
    if mean is not None and mean < params.min_mean_quality:
        return REJECT_MEAN_QUALITY
    return None


def quality_filter(
    records: Iterable[SequenceRecord],
    params: FilterParams,
) -> tuple[list[SequenceRecord], FilterReport]:
    """
    Remove low-quality and dubious records.

    Args:
        records: Input records.
        params: Thresholds.

    Returns:
        The kept records in input order, and a report of rejections.
    """
    kept: list[SequenceRecord] = []
    report = FilterReport()
    for record in records:
        report.total += 1
        reason = rejection_reason(record, params)
        if reason is None:
            kept.append(record)
        else:
            report.rejected[reason] += 1
    report.kept = len(kept)

    LOGGER.debug(
        "Quality filter kept %d of %d records (rejected: %s)",
        report.kept,
        report.total,
        report.rejected,
    )
    return kept, report


def resolve_length_cutoff(value: int | str) -> int:
    """
    Resolve a length cutoff given as nucleotides or as a dataset-size name.

    ``small``, ``medium`` and ``large`` map to 400, 300 and 250 nt.
    """
    if isinstance(value, int):
        if value < 0:
            raise ValueError("length cutoff must be >= 0")
        return value
    key = value.strip().lower()
    if key in DATASET_SIZE_CUTOFFS:
        return DATASET_SIZE_CUTOFFS[key]
    try:
        nucleotides = int(key)
    except ValueError as exc:
        raise ValueError(
            f"unknown length cutoff {value!r}; use nucleotides or one of {', '.join(DATASET_SIZE_CUTOFFS)}"
        ) from exc
    return resolve_length_cutoff(nucleotides)


def length_cutoff_filter(contigs: Iterable[SequenceRecord], min_length: int) -> list[SequenceRecord]:
    """Keep contigs with at least ``min_length`` bases (inclusive), in order."""
    return [contig for contig in contigs if len(contig) >= min_length]


def mask_records(
    records: Iterable[SequenceRecord],
    exclude_ids: Iterable[str],
) -> tuple[list[SequenceRecord], set[str]]:
    """
    Drop records whose id is in ``exclude_ids``.

    Returns:
        The remaining records in order, and the exclude ids never seen in the
        input (reported, not an error).
    """
    exclude = set(exclude_ids)
    seen: set[str] = set()
    kept: list[SequenceRecord] = []
    for record in records:
        if record.id in exclude:
            seen.add(record.id)
        else:
            kept.append(record)

    missing = exclude - seen
    if missing:
        LOGGER.warning(
            "%d masked id(s) not present in the input, e.g. %s",
            len(missing),
            sorted(missing)[0],
        )
    return kept, missing
