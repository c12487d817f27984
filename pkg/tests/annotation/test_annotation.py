"""Tests for annotation parsing, merging and export."""

from __future__ import annotations

import io
import json
import random

import pytest

from seqpipe.annotation.export import export_metarep_jsonl, export_tsv
from seqpipe.annotation.merge import merge_annotations
from seqpipe.annotation.models import Evidence, GenePrediction
from seqpipe.annotation.parsers import parse_evidence_table, parse_gene_predictions
from seqpipe.exceptions import AnnotationFormatError, DuplicateGeneError

pytestmark = pytest.mark.unit

PREDICTIONS = [
    "#gene_id\tcontig_id\tstart\tend\tstrand\n",
    "g2\tc1\t200\t400\t-\n",
    "g1\tc1\t1\t150\t+\n",
    "g3\tc2\t5\t90\t−\n",
]
BLAST = [
    "g1\tP001\t120.5\t1e-30\tDNA polymerase\n",
    "g1\tP002\t80\t1e-10\tpolymerase fragment\n",
    "g9\tP003\t50\t0.001\tnothing\n",
]
PRIAM = ["g1\tEC2.7.7.7\t99\t1e-30\tEC 2.7.7.7\n", "g3\tEC3.1\t10\t0.5\n"]


def _merge():
    predictions = parse_gene_predictions(PREDICTIONS)
    return merge_annotations(
        predictions,
        [parse_evidence_table(BLAST, "blast"), parse_evidence_table(PRIAM, "priam")],
    )


def test_parse_predictions() -> None:
    predictions = parse_gene_predictions(PREDICTIONS)
    assert predictions[0] == GenePrediction("g2", "c1", 200, 400, "-")
    assert predictions[2].strand == "-"


@pytest.mark.parametrize(
    ("row", "error_key"),
    [
        ("g1\tc1\t1\t150\n", "annotation_malformed"),
        ("g1\tc1\tone\t150\t+\n", "annotation_malformed"),
        ("g1\tc1\t0\t150\t+\n", "annotation_malformed"),
        ("g1\tc1\t150\t10\t+\n", "annotation_coordinates"),
        ("g1\tc1\t1\t10\t*\n", "annotation_malformed"),
    ],
)
def test_bad_prediction_rows(row: str, error_key: str) -> None:
    with pytest.raises(AnnotationFormatError) as err:
        parse_gene_predictions(["#header\n", row])
    assert err.value.error_key == error_key
    assert err.value.line == 2


def test_duplicate_prediction() -> None:
    with pytest.raises(DuplicateGeneError):
        parse_gene_predictions(["g1\tc1\t1\t10\t+\n", "g1\tc2\t1\t10\t+\n"])


def test_bad_evidence_rows() -> None:
    with pytest.raises(AnnotationFormatError) as err:
        parse_evidence_table(["g1\tP1\t10\t-1\tx\n"], "blast")
    assert err.value.error_key == "annotation_negative_evalue"
    with pytest.raises(AnnotationFormatError):
        parse_evidence_table(["g1\tP1\t10\tnan\n"], "blast")
    with pytest.raises(ValueError):
        parse_evidence_table([], " ")


def test_evidence_rows_short_quoted_and_malformed() -> None:
    with pytest.raises(AnnotationFormatError) as err:
        parse_evidence_table(["g1\tP1\t10\n"], "blast")
    assert err.value.line == 1
    assert "expected at least 4 columns, got 3" in str(err.value)

    parsed = parse_evidence_table(["g1\tP1\t10\t1e-5\n", 'g2\tP2\t5\t0.1\t"kinase\t""alpha"""\n'], "blast")
    assert [evidence.description for evidence in parsed] == ["", 'kinase\t"alpha"']

    with pytest.raises(AnnotationFormatError) as err:
        parse_evidence_table(["g1\tP1\t10\t1e-5\tok\n", 'g2\tP2\t5\t0.1\t"open\n'], "blast")
    assert err.value.line == 2
    assert err.value.error_key == "annotation_malformed"


def test_merge_orders_records_and_evidence() -> None:
    result = _merge()

    assert [record.prediction.gene_id for record in result.records] == ["g1", "g2", "g3"]
    g1 = result.records[0]
    # Equal e-value: higher score first
    assert [(evidence.tool, evidence.subject_id) for evidence in g1.evidences] == [
        ("blast", "P001"),
        ("priam", "EC2.7.7.7"),
        ("blast", "P002"),
    ]
    assert result.records[1].evidences == ()
    assert [orphan.gene_id for orphan in result.orphans] == ["g9"]


def test_merge_is_independent_of_split() -> None:
    predictions = parse_gene_predictions(PREDICTIONS)
    evidence = parse_evidence_table(BLAST, "blast") + parse_evidence_table(PRIAM, "priam")
    expected = merge_annotations(predictions, [evidence])

    rng = random.Random(5)
    for _ in range(20):
        shuffled_predictions = rng.sample(predictions, len(predictions))
        shuffled = rng.sample(evidence, len(evidence))
        cut = rng.randint(0, len(shuffled))
        assert merge_annotations(shuffled_predictions, [shuffled[:cut], shuffled[cut:]]) == expected


def test_merge_rejects_gene_predicted_twice() -> None:
    prediction = GenePrediction("g1", "c1", 1, 10, "+")
    with pytest.raises(DuplicateGeneError):
        merge_annotations([prediction, prediction], [])


def test_export_tsv() -> None:
    stream = io.StringIO()

    assert export_tsv(_merge().records, stream) == 3

    lines = stream.getvalue().splitlines()
    assert lines[0].startswith("#gene_id\tcontig_id\tstart")
    assert lines[1] == "g1\tc1\t1\t150\t+\t3\tblast\tP001\t1e-30\tDNA polymerase;EC 2.7.7.7;polymerase fragment"
    assert lines[2] == "g2\tc1\t200\t400\t-\t0\t\t\t\t"


def test_export_metarep_jsonl() -> None:
    stream = io.StringIO()

    assert export_metarep_jsonl(_merge().records, "lib1", stream) == 3

    documents = [json.loads(line) for line in stream.getvalue().splitlines()]
    assert documents[0] == {
        "common_name": "DNA polymerase",
        "evalues": [1e-30, 1e-30, 1e-10],
        "hit_ids": ["P001", "EC2.7.7.7", "P002"],
        "id": "g1",
        "library": "lib1",
        "tools": ["blast", "priam", "blast"],
    }
    assert documents[1]["common_name"] == "unknown"
    assert documents[2]["common_name"] == "unknown"


def test_export_metarep_requires_library() -> None:
    with pytest.raises(ValueError):
        export_metarep_jsonl([], "", io.StringIO())


def test_evidence_sort_key() -> None:
    weak = Evidence("g1", "blast", "S2", score=10, evalue=1e-5)
    strong = Evidence("g1", "blast", "S1", score=10, evalue=1e-9)
    assert sorted([weak, strong], key=lambda evidence: evidence.sort_key) == [strong, weak]
