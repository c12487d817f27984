"""Synthetic demo dataset and the mock tools its pipeline runs."""

from __future__ import annotations

from .data import (
    DEMO_EVIDENCE_TOOLS,
    DEMO_PIPELINE_NAME,
    DEMO_READS_NAME,
    DEMO_TAXONOMY,
    DEMO_TAXONOMY_NAME,
    DemoDataset,
    demo_pipeline_document,
    generate_reads,
    write_demo_dataset,
)

__all__ = [
    "DEMO_EVIDENCE_TOOLS",
    "DEMO_PIPELINE_NAME",
    "DEMO_READS_NAME",
    "DEMO_TAXONOMY",
    "DEMO_TAXONOMY_NAME",
    "DemoDataset",
    "demo_pipeline_document",
    "generate_reads",
    "write_demo_dataset",
]
