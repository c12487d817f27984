"""Metrics data types."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

from seqpipe.exceptions import MetricsError


@dataclass(frozen=True, slots=True)
class RunMetrics:
    """
    Timing of one run.

    Attributes:
        run_id: Run identifier.
        core_count: Core budget the run had.
        tool_times: Tool (stage or job label) to per-task wall times in seconds.
        stage_makespans: Stage to makespan in seconds; every stage of the run appears.
    """

    run_id: str
    core_count: int
    tool_times: Mapping[str, tuple[float, ...]] = field(default_factory=dict)
    stage_makespans: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Reject negative times and core counts."""
        if self.core_count < 1:
            raise MetricsError(f"run {self.run_id}: core_count must be >= 1", error_key="metrics_invalid")
        for tool, times in self.tool_times.items():
            if any(value < 0 for value in times):
                raise MetricsError(f"run {self.run_id}: negative task time for {tool}", error_key="metrics_invalid")
        for stage, value in self.stage_makespans.items():
            if value < 0:
                raise MetricsError(f"run {self.run_id}: negative makespan for {stage}", error_key="metrics_invalid")

    @property
    def tool_totals(self) -> dict[str, float]:
        """Summed task time per tool."""
        return {tool: float(sum(times)) for tool, times in self.tool_times.items()}

    @property
    def makespan(self) -> float:
        """Sum of stage makespans (stages run one after another)."""
        return float(sum(self.stage_makespans.values()))

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation with sorted keys."""
        return {
            "run_id": self.run_id,
            "core_count": self.core_count,
            "tool_times": {tool: list(self.tool_times[tool]) for tool in sorted(self.tool_times)},
            "stage_makespans": {stage: self.stage_makespans[stage] for stage in sorted(self.stage_makespans)},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RunMetrics:
        """Inverse of :meth:`to_dict`."""
        try:
            return cls(
                run_id=str(data["run_id"]),
                core_count=int(data["core_count"]),
                tool_times={tool: tuple(float(v) for v in times) for tool, times in data["tool_times"].items()},
                stage_makespans={stage: float(v) for stage, v in data["stage_makespans"].items()},
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise MetricsError(f"malformed metrics document: {exc}", error_key="metrics_malformed") from exc


@dataclass(frozen=True, slots=True)
class ToolShare:
    """One tool's row in a breakdown."""

    tool: str
    median_time: float
    percent: float


@dataclass(frozen=True, slots=True)
class BreakdownReport:
    """Per-tool median times and their share of the total, tools sorted by name."""

    shares: tuple[ToolShare, ...]
    total_percent: float
    n_runs: int
    normalization: str

    def share(self, tool: str) -> ToolShare:
        """Return one tool's row."""
        for row in self.shares:
            if row.tool == tool:
                return row
        raise KeyError(tool)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {
            "n_runs": self.n_runs,
            "normalization": self.normalization,
            "total_percent": self.total_percent,
            "tools": [
                {"tool": row.tool, "median_time_s": row.median_time, "percent": row.percent} for row in self.shares
            ],
        }


@dataclass(frozen=True, slots=True)
class SpeedupRow:
    """Scaling of one core count against the reference."""

    cores: int
    makespan: float
    speedup: float
    efficiency: float


@dataclass(frozen=True, slots=True)
class SpeedupTable:
    """Speedup rows for one label, core counts ascending."""

    label: str
    reference_cores: int
    rows: tuple[SpeedupRow, ...]

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {
            "label": self.label,
            "reference_cores": self.reference_cores,
            "rows": [
                {"cores": r.cores, "makespan_s": r.makespan, "speedup": r.speedup, "efficiency": r.efficiency}
                for r in self.rows
            ],
        }

