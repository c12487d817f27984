"""Speedup and parallel efficiency across core counts."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Mapping, Sequence

import numpy as np

from seqpipe.exceptions import MetricsError
from seqpipe.metrics.models import RunMetrics, SpeedupRow, SpeedupTable


def speedup_table(runs: Sequence[RunMetrics], label: str = "") -> SpeedupTable:
    """
    Speedup of each core count against the smallest one.

    Runs are grouped by ``core_count`` and each group's median makespan is
    used. ``speedup(c) = makespan(ref) / makespan(c)`` and
    ``efficiency(c) = speedup(c) * ref / c``.

    Raises:
        MetricsError: Fewer than two core counts, or a zero makespan.
    """
    groups: dict[int, list[float]] = defaultdict(list)
    for run in runs:
        groups[run.core_count].append(run.makespan)
    if len(groups) < 2:
        raise MetricsError(
            f"speedup{f' for {label}' if label else ''} needs at least two core counts, got {sorted(groups)}",
            error_key="metrics_single_group",
        )

    makespans = {cores: float(np.median(values)) for cores, values in groups.items()}
    if any(value <= 0 for value in makespans.values()):
        raise MetricsError(f"zero makespan in speedup input{f' for {label}' if label else ''}")
    reference = min(makespans)
    rows = []
    for cores in sorted(makespans):
        speedup = makespans[reference] / makespans[cores]
        rows.append(
            SpeedupRow(
                cores=cores,
                makespan=makespans[cores],
                speedup=speedup,
                efficiency=speedup * reference / cores,
            )
        )
    return SpeedupTable(label=label, reference_cores=reference, rows=tuple(rows))


def speedup_tables(runs_by_label: Mapping[str, Sequence[RunMetrics]]) -> list[SpeedupTable]:
    """One table per label, sorted by label; labels seen at a single core count are skipped."""
    return [
        speedup_table(runs, label)
        for label, runs in sorted(runs_by_label.items())
        if len({run.core_count for run in runs}) >= 2
    ]
