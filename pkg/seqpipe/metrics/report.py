"""
Run reports.

A report is rendered twice from the same inputs: as text for people and as a
JSON document for tools, next to a ``breakdown.tsv`` of (tool, median,
percent) rows. Tools are listed alphabetically, core counts ascending, runs
in the order given; equal inputs render to identical bytes.
"""

from __future__ import annotations

from collections.abc import Sequence
import io
import json
from pathlib import Path
from typing import TYPE_CHECKING, Any

from seqpipe.const import BREAKDOWN_TSV_NAME, REPORT_JSON_NAME, REPORT_TEXT_NAME
from seqpipe.utils import tsv_writer

if TYPE_CHECKING:
    from seqpipe.metrics.models import BreakdownReport, RunMetrics, SpeedupTable
    from seqpipe.simcluster.models import NodeTaskTimes


def _has_stragglers(stragglers: Sequence[NodeTaskTimes] | None) -> bool:
    return bool(stragglers) and any(node.slowdown > 1.0 for node in stragglers or ())


def report_document(
    metrics: Sequence[RunMetrics],
    breakdown: BreakdownReport | None,
    speedups: Sequence[SpeedupTable],
    *,
    title: str = "",
    stragglers: Sequence[NodeTaskTimes] | None = None,
) -> dict[str, Any]:
    """Machine-readable report; empty sections are left out."""
    document: dict[str, Any] = {
        "title": title,
        "runs": [
            {"run_id": run.run_id, "core_count": run.core_count, "makespan_s": run.makespan} for run in metrics
        ],
    }
    if breakdown is not None:
        document["breakdown"] = breakdown.to_dict()
    if speedups:
        document["speedup"] = [table.to_dict() for table in sorted(speedups, key=lambda t: t.label)]
    if _has_stragglers(stragglers):
        document["stragglers"] = [
            {
                "node_id": node.node_id,
                "slowdown": node.slowdown,
                "n_tasks": node.n_tasks,
                "median_task_time_s": node.median_task_time,
            }
            for node in stragglers or ()
        ]
    return document


def render_report_text(
    metrics: Sequence[RunMetrics],
    breakdown: BreakdownReport | None,
    speedups: Sequence[SpeedupTable],
    *,
    title: str = "",
    stragglers: Sequence[NodeTaskTimes] | None = None,
) -> str:
    """Human-readable report."""
    lines = [f"seqpipe report{f': {title}' if title else ''}", ""]

    lines.append(f"Runs ({len(metrics)})")
    lines.append(f"  {'run':<24} {'cores':>6} {'makespan_s':>12}")
    lines.extend(f"  {run.run_id:<24} {run.core_count:>6} {run.makespan:>12.3f}" for run in metrics)

    if breakdown is not None:
        lines += ["", f"Execution time breakdown ({breakdown.normalization}; {breakdown.n_runs} run(s))"]
        lines.append(f"  {'tool':<24} {'median_s':>12} {'percent':>8}")
        lines.extend(f"  {row.tool:<24} {row.median_time:>12.3f} {row.percent:>8.2f}" for row in breakdown.shares)
        lines.append(f"  {'total':<24} {'':>12} {breakdown.total_percent:>8.2f}")

    for table in sorted(speedups, key=lambda t: t.label):
        lines += ["", f"Speedup: {table.label or 'all runs'} (reference {table.reference_cores} cores)"]
        lines.append(f"  {'cores':>6} {'makespan_s':>12} {'speedup':>8} {'efficiency':>10}")
        lines.extend(
            f"  {row.cores:>6} {row.makespan:>12.3f} {row.speedup:>8.3f} {row.efficiency:>10.3f}" for row in table.rows
        )

    if _has_stragglers(stragglers):
        lines += ["", "Stragglers (per-node task times)"]
        lines.append(f"  {'node':<12} {'slowdown':>8} {'tasks':>6} {'median_task_s':>14}")
        for node in stragglers or ():
            median = f"{node.median_task_time:.3f}" if node.median_task_time is not None else "-"
            lines.append(f"  {node.node_id:<12} {node.slowdown:>8.2f} {node.n_tasks:>6} {median:>14}")

    return "\n".join(lines) + "\n"


def render_breakdown_tsv(breakdown: BreakdownReport) -> str:
    """``tool<TAB>median_time_s<TAB>percent`` rows under a header."""
    buffer = io.StringIO()
    writer = tsv_writer(buffer)
    writer.writerow(["tool", "median_time_s", "percent"])
    writer.writerows([row.tool, f"{row.median_time:.6f}", f"{row.percent:.4f}"] for row in breakdown.shares)
    return buffer.getvalue()


def write_run_report(
    metrics: Sequence[RunMetrics],
    breakdown: BreakdownReport | None,
    speedups: Sequence[SpeedupTable],
    out_dir: Path | str,
    *,
    title: str = "",
    stragglers: Sequence[NodeTaskTimes] | None = None,
) -> list[Path]:
    """
    Write ``report.txt``, ``report.json`` and, with a breakdown, ``breakdown.tsv``.

    Args:
        metrics: The runs the report covers.
        breakdown: Per-tool breakdown, if any.
        speedups: Speedup tables; may be empty.
        out_dir: Directory to write into; created if missing.
        title: Report heading.
        stragglers: Per-node task times; the section appears only when some
            node is slowed down.

    Returns:
        The written paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text_path = out_dir / REPORT_TEXT_NAME
    text_path.write_text(
        render_report_text(metrics, breakdown, speedups, title=title, stragglers=stragglers), encoding="utf-8"
    )
    json_path = out_dir / REPORT_JSON_NAME
    document = report_document(metrics, breakdown, speedups, title=title, stragglers=stragglers)
    json_path.write_text(json.dumps(document, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    written = [text_path, json_path]
    if breakdown is not None:
        tsv_path = out_dir / BREAKDOWN_TSV_NAME
        tsv_path.write_text(render_breakdown_tsv(breakdown), encoding="utf-8")
        written.append(tsv_path)
    return written
