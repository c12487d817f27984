"""Execution backends."""

from __future__ import annotations

from .base import ExecutionBackend
from .local import LocalBackend, task_environment

__all__ = [
    "ExecutionBackend",
    "LocalBackend",
    "task_environment",
]
