"""
Mock analysis tools for the demo pipeline.

Run as ``python -m seqpipe.demo.tools <tool> ...``. Every output value is
derived from a hash of the record or gene id, so a read yields the same rows
no matter which partition it lands in.
"""

from __future__ import annotations

import argparse
from collections.abc import Sequence
import hashlib
from pathlib import Path
import sys

from seqpipe.annotation.parsers import parse_gene_predictions
from seqpipe.exceptions import SeqPipeError
from seqpipe.seqdata.records import read_sequence_file
from seqpipe.taxonomy.io import read_taxonomy_tsv
from seqpipe.taxonomy.tree import build_taxonomy
from seqpipe.utils import tsv_writer

_DESCRIPTIONS = {
    "blast": (
        "DNA polymerase III subunit beta",
        "ABC transporter ATP-binding protein",
        "50S ribosomal protein L2",
        "elongation factor Tu",
        "hypothetical protein",
    ),
    "priam": ("EC 2.7.7.7", "EC 3.6.3.-", "EC 1.1.1.1", "EC 2.3.1.-"),
    "interpro": (
        "IPR001001 DNA polymerase III beta subunit",
        "IPR003439 ABC transporter-like",
        "IPR002171 Ribosomal protein L2",
        "IPR004161 Translation elongation factor EFTu-like",
    ),
}


def _digest(*parts: str) -> bytes:
    return hashlib.sha256(":".join(parts).encode()).digest()


def search(reads: Path, taxonomy: Path, output: Path) -> int:
    """
    Write ``read_id<TAB>taxon_id`` hits.

    A read gets zero to three hits, all on one species or its sibling species.
    """
    with taxonomy.open(encoding="utf-8") as handle:
        tree = build_taxonomy(read_taxonomy_tsv(handle))
    leaves = sorted(taxon for taxon in tree.nodes if not tree.children.get(taxon))
    rows = 0
    with output.open("w", encoding="utf-8", newline="\n") as out:
        writer = tsv_writer(out)
        writer.writerow(["#read_id", "taxon_id"])
        for record in read_sequence_file(reads):
            digest = _digest("search", record.id)
            primary = leaves[digest[1] % len(leaves)]
            parent = tree.node(primary).parent
            siblings = sorted(tree.children.get(parent, (primary,))) if parent else [primary]
            for k in range(digest[0] % 4):
                taxon = siblings[digest[2 + k] % len(siblings)] if digest[2 + k] % 3 == 0 else primary
                writer.writerow([record.id, taxon])
                rows += 1
    return rows


def predict(contigs: Path, output: Path) -> int:
    """Write one or two gene predictions per contig, tiling it."""
    rows = 0
    with output.open("w", encoding="utf-8", newline="\n") as out:
        writer = tsv_writer(out)
        writer.writerow(["#gene_id", "contig_id", "start", "end", "strand"])
        for record in read_sequence_file(contigs):
            digest = _digest("predict", record.id)
            n_genes = min(1 + digest[0] % 2, len(record))
            for k in range(n_genes):
                start = 1 + k * len(record) // n_genes
                end = (k + 1) * len(record) // n_genes
                strand = "+" if digest[1 + k] % 2 == 0 else "-"
                writer.writerow([f"{record.id}_g{k + 1}", record.id, start, end, strand])
                rows += 1
    return rows


def evidence(tool: str, genes: Path, output: Path) -> int:
    """Write ``tool``'s hits for about three quarters of the predicted genes."""
    with genes.open(encoding="utf-8") as handle:
        predictions = parse_gene_predictions(handle)
    descriptions = _DESCRIPTIONS.get(tool, (f"{tool} hit",))
    rows = 0
    with output.open("w", encoding="utf-8", newline="\n") as out:
        writer = tsv_writer(out)
        writer.writerow(["#gene_id", "subject_id", "score", "evalue", "description"])
        for prediction in predictions:
            digest = _digest(tool, prediction.gene_id)
            if digest[0] % 4 == 0:
                continue
            subject = f"{tool.upper()}{int.from_bytes(digest[1:4], 'big'):08d}"
            score = f"{20 + digest[4] % 200}.{digest[5] % 10}"
            evalue = repr((1 + digest[7] % 9) * 10.0 ** -(digest[6] % 50))
            description = descriptions[digest[8] % len(descriptions)]
            writer.writerow([prediction.gene_id, subject, score, evalue, description])
            rows += 1
    return rows


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for the mock tools."""
    parser = argparse.ArgumentParser(prog="seqpipe.demo.tools", description="Mock analysis tools for the demo pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    search_parser = sub.add_parser("search", help="similarity search of reads against a taxonomy")
    search_parser.add_argument("--reads", type=Path, required=True)
    search_parser.add_argument("--taxonomy", type=Path, required=True)
    search_parser.add_argument("--output", type=Path, required=True)

    predict_parser = sub.add_parser("predict", help="gene prediction on contigs")
    predict_parser.add_argument("--input", type=Path, required=True)
    predict_parser.add_argument("--output", type=Path, required=True)

    evidence_parser = sub.add_parser("evidence", help="functional evidence for predicted genes")
    evidence_parser.add_argument("--tool", required=True)
    evidence_parser.add_argument("--genes", type=Path, required=True)
    evidence_parser.add_argument("--output", type=Path, required=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one mock tool; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        if args.command == "search":
            search(args.reads, args.taxonomy, args.output)
        elif args.command == "predict":
            predict(args.input, args.output)
        else:
            evidence(args.tool, args.genes, args.output)
    except (OSError, SeqPipeError) as exc:
        sys.stderr.write(f"ERROR: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
