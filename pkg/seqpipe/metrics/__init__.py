"""Execution time breakdowns, speedup tables and run reports."""

from __future__ import annotations

from .breakdown import NORMALIZATION_PERCENT_OF_MEDIANS, median_breakdown
from .ledger import combine_runs, group_by_tool, load_run_metrics, metrics_from_ledger, metrics_from_trace
from .models import BreakdownReport, RunMetrics, SpeedupRow, SpeedupTable, ToolShare
from .report import render_breakdown_tsv, render_report_text, report_document, write_run_report
from .speedup import speedup_table, speedup_tables

__all__ = [
    "NORMALIZATION_PERCENT_OF_MEDIANS",
    "BreakdownReport",
    "RunMetrics",
    "SpeedupRow",
    "SpeedupTable",
    "ToolShare",
    "combine_runs",
    "group_by_tool",
    "load_run_metrics",
    "median_breakdown",
    "metrics_from_ledger",
    "metrics_from_trace",
    "render_breakdown_tsv",
    "render_report_text",
    "report_document",
    "speedup_table",
    "speedup_tables",
    "write_run_report",
]
