"""Annotation data types."""

from __future__ import annotations

from dataclasses import dataclass

STRAND_FORWARD = "+"
STRAND_REVERSE = "-"


@dataclass(frozen=True, slots=True)
class GenePrediction:
    """A predicted gene on a contig (1-based, inclusive coordinates)."""

    gene_id: str
    contig_id: str
    start: int
    end: int
    strand: str

    @property
    def sort_key(self) -> tuple[str, int, str]:
        """Export order: contig, start, gene id."""
        return (self.contig_id, self.start, self.gene_id)


@dataclass(frozen=True, slots=True)
class Evidence:
    """One tool's hit for a predicted gene."""

    gene_id: str
    tool: str
    subject_id: str
    score: float
    evalue: float
    description: str = ""

    @property
    def sort_key(self) -> tuple[float, float, str, str, str]:
        """Best first: lowest e-value, then highest score, then tool and subject."""
        return (self.evalue, -self.score, self.tool, self.subject_id, self.description)


@dataclass(frozen=True, slots=True)
class AnnotationRecord:
    """A gene with all of its evidence, best evidence first."""

    prediction: GenePrediction
    evidences: tuple[Evidence, ...] = ()

    @property
    def best(self) -> Evidence | None:
        """The top-ranked evidence, if any."""
        return self.evidences[0] if self.evidences else None


@dataclass(frozen=True, slots=True)
class MergeResult:
    """Merged records plus evidence that referenced unknown genes."""

    records: tuple[AnnotationRecord, ...]
    orphans: tuple[Evidence, ...]
