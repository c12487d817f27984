"""
Synthetic demo dataset.

``write_demo_dataset`` lays out everything the three-stage demo pipeline
needs: reads, a small reference taxonomy and the pipeline document itself.
The reads are drawn from a seeded generator; a share of them is too short,
N-rich or low quality so the filter stage has something to drop.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
import shlex
import sys

import numpy as np

from seqpipe.const import FORMAT_FASTQ, GATHER_ANNOTATIONS, GATHER_RECORDS, GATHER_ROWS, LOGGER, MODE_SCATTER
from seqpipe.pipeline.parser import parse_pipeline_spec
from seqpipe.pipeline.validators.yaml_validator import dict_to_yaml
from seqpipe.seqdata.records import SequenceRecord, write_sequence_file
from seqpipe.utils import tsv_writer

DEMO_READS_NAME = "reads.fastq"
DEMO_TAXONOMY_NAME = "taxonomy.tsv"
DEMO_PIPELINE_NAME = "pipeline.yaml"
DEMO_PIPELINE_ID = "demo"
DEMO_EVIDENCE_TOOLS = ("blast", "priam", "interpro")

# child, parent, name, rank
DEMO_TAXONOMY: tuple[tuple[str, str, str, str], ...] = (
    ("1", "", "root", "no rank"),
    ("2", "1", "Bacteria", "superkingdom"),
    ("2157", "1", "Archaea", "superkingdom"),
    ("1224", "2", "Proteobacteria", "phylum"),
    ("1239", "2", "Firmicutes", "phylum"),
    ("28890", "2157", "Euryarchaeota", "phylum"),
    ("561", "1224", "Escherichia", "genus"),
    ("286", "1224", "Pseudomonas", "genus"),
    ("1386", "1239", "Bacillus", "genus"),
    ("2172", "28890", "Methanobrevibacter", "genus"),
    ("562", "561", "Escherichia coli", "species"),
    ("564", "561", "Escherichia fergusonii", "species"),
    ("287", "286", "Pseudomonas aeruginosa", "species"),
    ("294", "286", "Pseudomonas fluorescens", "species"),
    ("1423", "1386", "Bacillus subtilis", "species"),
    ("1428", "1386", "Bacillus thuringiensis", "species"),
    ("2173", "2172", "Methanobrevibacter smithii", "species"),
)

_BASES = np.array(list("ACGT"))


@dataclass(frozen=True, slots=True)
class DemoDataset:
    """Paths of a written demo dataset."""

    directory: Path
    reads: Path
    taxonomy: Path
    pipeline: Path
    n_reads: int


def generate_reads(n_reads: int = 1000, seed: int = 7) -> list[SequenceRecord]:
    """
    Draw ``n_reads`` FASTQ reads.

    About 10% are shorter than 50 bases, 5% carry many Ns and 10% have a low
    mean quality.
    """
    rng = np.random.default_rng(seed)
    width = len(str(n_reads))
    reads = []
    for index in range(1, n_reads + 1):
        length = int(rng.integers(20, 50)) if rng.random() < 0.1 else int(rng.integers(60, 151))
        bases = _BASES[rng.integers(0, 4, size=length)]
        if rng.random() < 0.05:
            bases[rng.random(length) < 0.3] = "N"
        low_quality = rng.random() < 0.1
        quality = rng.integers(2, 15, size=length) if low_quality else rng.integers(25, 41, size=length)
        reads.append(
            SequenceRecord(
                id=f"read_{index:0{width}d}",
                bases="".join(bases),
                quality=tuple(int(q) for q in quality),
            )
        )
    return reads


def demo_pipeline_document(taxonomy_path: Path) -> dict:
    """The demo pipeline: filter reads, classify them, annotate them."""
    taxonomy = shlex.quote(str(taxonomy_path))
    python = shlex.quote(sys.executable)
    tools = f"{python} -m seqpipe.demo.tools"
    evidence = " && ".join(
        f"{tools} evidence --tool {tool} --genes {{workdir}}/genes_{{part}}.tsv --output {{workdir}}/{tool}_{{part}}.tsv"
        for tool in DEMO_EVIDENCE_TOOLS
    )
    return {
        "name": DEMO_PIPELINE_ID,
        "stages": [
            {
                "id": "qc",
                "mode": MODE_SCATTER,
                "command": (
                    f"{python} -m seqpipe filter --input {{input}} --output {{workdir}}/filtered_{{part}}.fastq"
                    " --min-length 50 --min-quality 20 --max-n 0.1"
                ),
                "outputs": ["{workdir}/filtered_{part}.fastq"],
                "gather": GATHER_RECORDS,
                "base_time_s": 2.0,
            },
            {
                "id": "classify",
                "mode": MODE_SCATTER,
                "input": "qc",
                "command": (
                    f"{tools} search --reads {{input}} --taxonomy {taxonomy} --output {{workdir}}/hits_{{part}}.tsv"
                    f" && {python} -m seqpipe classify --hits {{workdir}}/hits_{{part}}.tsv --taxonomy {taxonomy}"
                    " --output {output}"
                ),
                "outputs": ["{workdir}/assignments_{part}.tsv"],
                "gather": GATHER_ROWS,
                "base_time_s": 5.0,
            },
            {
                "id": "annotate",
                "mode": MODE_SCATTER,
                "input": "qc",
                "command": f"{tools} predict --input {{input}} --output {{workdir}}/genes_{{part}}.tsv && {evidence}",
                "outputs": [
                    "{workdir}/genes_{part}.tsv",
                    *(f"{{workdir}}/{tool}_{{part}}.tsv" for tool in DEMO_EVIDENCE_TOOLS),
                ],
                "gather": GATHER_ANNOTATIONS,
                "base_time_s": 10.0,
            },
        ],
    }


def write_demo_dataset(directory: Path | str, n_reads: int = 1000, seed: int = 7) -> DemoDataset:
    """Write reads, taxonomy and pipeline document into ``directory``."""
    directory = Path(directory).resolve()
    directory.mkdir(parents=True, exist_ok=True)

    reads_path = directory / DEMO_READS_NAME
    write_sequence_file(reads_path, generate_reads(n_reads, seed), FORMAT_FASTQ)

    taxonomy_path = directory / DEMO_TAXONOMY_NAME
    with taxonomy_path.open("w", encoding="utf-8", newline="\n") as handle:
        writer = tsv_writer(handle)
        writer.writerow(["#child_id", "parent_id", "name", "rank"])
        writer.writerows(DEMO_TAXONOMY)

    pipeline_text = dict_to_yaml(demo_pipeline_document(taxonomy_path))
    parse_pipeline_spec(pipeline_text)
    pipeline_path = directory / DEMO_PIPELINE_NAME
    pipeline_path.write_text(pipeline_text, encoding="utf-8")

    LOGGER.info("Demo dataset with %d reads written to %s", n_reads, directory)
    return DemoDataset(
        directory=directory,
        reads=reads_path,
        taxonomy=taxonomy_path,
        pipeline=pipeline_path,
        n_reads=n_reads,
    )
