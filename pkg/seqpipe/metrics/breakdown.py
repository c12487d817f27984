"""Per-tool execution time breakdown over repeated runs."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from seqpipe.const import LOGGER
from seqpipe.exceptions import MetricsError
from seqpipe.metrics.models import BreakdownReport, RunMetrics, ToolShare

NORMALIZATION_PERCENT_OF_MEDIANS = "percent of per-tool median totals across runs"


def median_breakdown(runs: Sequence[RunMetrics]) -> BreakdownReport:
    """
    Median time per tool and its share of the summed medians.

    For every tool, each run's summed task time is taken and the median across
    runs kept (mean of the middle two for an even count). Percentages are
    those medians over their sum. When every median is zero the share is
    split evenly.

    Raises:
        MetricsError: No runs, no tools, or runs measuring different tools.
    """
    if not runs:
        raise MetricsError("cannot summarize zero runs", error_key="metrics_no_runs")
    tools = set(runs[0].tool_times)
    if not tools:
        raise MetricsError(f"run {runs[0].run_id} has no tool times", error_key="metrics_no_tools")
    for run in runs[1:]:
        if set(run.tool_times) != tools:
            difference = sorted(tools.symmetric_difference(run.tool_times))
            raise MetricsError(
                f"run {run.run_id} measures a different tool set (differs in {', '.join(difference)})",
                error_key="metrics_tool_mismatch",
                placeholders={"run": run.run_id, "tools": difference},
            )

    ordered = sorted(tools)
    totals = np.array([[run.tool_totals[tool] for tool in ordered] for run in runs], dtype=float)
    medians = np.median(totals, axis=0)
    total = float(medians.sum())
    if total > 0:
        percents = medians / total * 100.0
    else:
        LOGGER.warning("All tool medians are zero; splitting the breakdown evenly")
        percents = np.full(len(ordered), 100.0 / len(ordered))

    shares = tuple(
        ToolShare(tool=tool, median_time=float(median), percent=float(percent))
        for tool, median, percent in zip(ordered, medians, percents, strict=True)
    )
    return BreakdownReport(
        shares=shares,
        total_percent=float(sum(share.percent for share in shares)),
        n_runs=len(runs),
        normalization=NORMALIZATION_PERCENT_OF_MEDIANS,
    )
