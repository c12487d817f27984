"""Tests for the demo dataset, its mock tools and the end-to-end demo pipeline."""

from __future__ import annotations

from pathlib import Path

import pytest

from seqpipe.cli import dispatch
from seqpipe.demo import DEMO_TAXONOMY, DemoDataset, demo_pipeline_document, generate_reads, write_demo_dataset
from seqpipe.demo.tools import evidence, main as tools_main, predict, search
from seqpipe.executor.backends.base import ExecutionBackend
from seqpipe.executor.backends.local import LocalBackend
from seqpipe.executor.base import PipelineExecutor
from seqpipe.pipeline.parser import load_pipeline_spec
from seqpipe.seqdata.filters import FilterParams, quality_filter
from seqpipe.seqdata.records import read_sequence_file, write_sequence_file
from seqpipe.simcluster.backend import SimClusterBackend
from seqpipe.simcluster.models import SimClusterConfig, SimNode

# Gathered outputs that must not depend on the core budget
DETERMINISTIC_OUTPUTS = (
    "qc/filtered.fastq",
    "classify/assignments.tsv",
    "annotate/annotations.tsv",
    "annotate/annotations.jsonl",
)


@pytest.mark.unit
def test_generate_reads_is_seeded() -> None:
    assert generate_reads(50, seed=3) == generate_reads(50, seed=3)
    assert generate_reads(50, seed=3) != generate_reads(50, seed=4)
    assert [read.id for read in generate_reads(12)][:2] == ["read_01", "read_02"]


@pytest.mark.unit
def test_generated_reads_exercise_every_filter() -> None:
    kept, report = quality_filter(
        generate_reads(1000), FilterParams(min_length=50, min_mean_quality=20, max_n_fraction=0.1)
    )

    assert report.total == 1000
    assert 0 < len(kept) < 1000
    assert all(count > 0 for count in report.rejected.values())


@pytest.mark.unit
def test_write_demo_dataset(tmp_path: Path) -> None:
    dataset = write_demo_dataset(tmp_path / "demo", n_reads=40)

    spec = load_pipeline_spec(dataset.pipeline)
    assert spec.stage_ids == ["qc", "classify", "annotate"]
    assert [stage.input for stage in spec.stages[1:]] == ["qc", "qc"]
    assert len(list(read_sequence_file(dataset.reads))) == 40
    assert len(dataset.taxonomy.read_text().splitlines()) == len(DEMO_TAXONOMY) + 1


@pytest.mark.unit
def test_pipeline_document_quotes_taxonomy_path(tmp_path: Path) -> None:
    document = demo_pipeline_document(tmp_path / "with space" / "taxonomy.tsv")
    classify = next(stage for stage in document["stages"] if stage["id"] == "classify")
    assert f"'{tmp_path / 'with space' / 'taxonomy.tsv'}'" in classify["command"]


@pytest.mark.unit
def test_cli_demo(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert dispatch(["demo", "--out", str(tmp_path), "--reads", "20"]) == 0
    assert [Path(line).name for line in capsys.readouterr().out.splitlines()] == [
        "reads.fastq",
        "taxonomy.tsv",
        "pipeline.yaml",
    ]


@pytest.mark.unit
class TestMockTools:
    """Mock tool output depends on ids only, never on partitioning."""

    @pytest.fixture
    def dataset(self, tmp_path: Path) -> DemoDataset:
        return write_demo_dataset(tmp_path / "demo", n_reads=60)

    def test_search_is_partition_independent(self, tmp_path: Path, dataset: DemoDataset) -> None:
        reads = list(read_sequence_file(dataset.reads))
        subset = tmp_path / "subset.fastq"
        write_sequence_file(subset, reads[::3], "fastq")

        search(dataset.reads, dataset.taxonomy, tmp_path / "all.tsv")
        search(subset, dataset.taxonomy, tmp_path / "subset.tsv")

        subset_ids = {read.id for read in reads[::3]}
        all_rows = [line for line in (tmp_path / "all.tsv").read_text().splitlines()[1:] if line.split("\t")[0] in subset_ids]
        assert (tmp_path / "subset.tsv").read_text().splitlines()[1:] == all_rows

    def test_search_hits_known_taxa(self, tmp_path: Path, dataset: DemoDataset) -> None:
        rows = search(dataset.reads, dataset.taxonomy, tmp_path / "hits.tsv")
        known = {row[0] for row in DEMO_TAXONOMY}

        lines = (tmp_path / "hits.tsv").read_text().splitlines()[1:]
        assert len(lines) == rows
        assert {line.split("\t")[1] for line in lines} <= known

    def test_predict_and_evidence(self, tmp_path: Path, dataset: DemoDataset) -> None:
        genes = tmp_path / "genes.tsv"
        n_genes = predict(dataset.reads, genes)
        n_blast = evidence("blast", genes, tmp_path / "blast.tsv")

        gene_rows = genes.read_text().splitlines()[1:]
        assert len(gene_rows) == n_genes
        assert 60 <= n_genes <= 120
        assert 0 < n_blast < n_genes
        gene_ids = {row.split("\t")[0] for row in gene_rows}
        assert {row.split("\t")[0] for row in (tmp_path / "blast.tsv").read_text().splitlines()[1:]} <= gene_ids

    def test_main_reports_missing_input(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        code = tools_main(["predict", "--input", str(tmp_path / "missing.fasta"), "--output", str(tmp_path / "g.tsv")])
        assert code == 1
        assert capsys.readouterr().err.startswith("ERROR:")


async def _run_demo(dataset: DemoDataset, backend: ExecutionBackend, core_budget: int, run_root: Path) -> None:
    executor = PipelineExecutor(backend, poll_interval=0.05, timeout=300)
    try:
        result = await executor.async_run_pipeline(
            load_pipeline_spec(dataset.pipeline), dataset.reads, core_budget, run_root
        )
    finally:
        await backend.async_close()
    assert result.succeeded
    assert result.retained_workdirs == []


@pytest.mark.integration
async def test_demo_outputs_do_not_depend_on_core_budget(tmp_path: Path) -> None:
    dataset = write_demo_dataset(tmp_path / "demo", n_reads=200)

    await _run_demo(dataset, LocalBackend(workers=4), 1, tmp_path / "cores-1")
    await _run_demo(dataset, LocalBackend(workers=4), 4, tmp_path / "cores-4")
    cluster = SimClusterConfig(nodes=(SimNode("node1", 16),))
    await _run_demo(
        dataset, SimClusterBackend(cluster, inner=LocalBackend(workers=4)), 16, tmp_path / "cores-16"
    )

    for name in DETERMINISTIC_OUTPUTS:
        reference = (tmp_path / "cores-1" / name).read_bytes()
        assert reference
        assert (tmp_path / "cores-4" / name).read_bytes() == reference, name
        assert (tmp_path / "cores-16" / name).read_bytes() == reference, name
