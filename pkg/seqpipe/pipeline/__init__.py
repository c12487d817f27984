"""
Pipeline definitions for seqpipe.

A pipeline is a linear chain of stages, each a shell command template that
runs once (``single``) or once per input partition (``scatter``). Documents
are YAML, validated with voluptuous, and every invariant is re-checked by
:func:`validate_spec` without touching the filesystem.
"""

from __future__ import annotations

from .model import PipelineSpec, StageResources, StageSpec, Violation
from .parser import load_pipeline_spec, parse_pipeline_spec, pipeline_spec_to_dict, serialize_pipeline_spec
from .validators import validate_spec

__all__ = [
    "PipelineSpec",
    "StageResources",
    "StageSpec",
    "Violation",
    "load_pipeline_spec",
    "parse_pipeline_spec",
    "pipeline_spec_to_dict",
    "serialize_pipeline_spec",
    "validate_spec",
]
