"""Parse and serialize pipeline config documents."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import voluptuous as vol

from seqpipe.const import (
    CONF_BASE_TIME_S,
    CONF_COMMAND,
    CONF_CORES,
    CONF_FORMAT,
    CONF_GATHER,
    CONF_ID,
    CONF_INPUT,
    CONF_LOGS,
    CONF_MODE,
    CONF_NAME,
    CONF_OUTPUTS,
    CONF_STAGES,
    CONF_WORKDIR_ROOT,
    GATHER_RECORDS,
    INPUT_DATASET,
    LOGGER,
    MODE_SCATTER,
)
from seqpipe.exceptions import SpecValidationError
from seqpipe.pipeline.model import PipelineSpec, StageResources, StageSpec
from seqpipe.pipeline.schemas import PIPELINE_SCHEMA, config_error_from_invalid
from seqpipe.pipeline.validators import dict_to_yaml, load_config_yaml, validate_spec


def parse_pipeline_spec(text: str) -> PipelineSpec:
    """
    Parse a pipeline document.

    Defaults are resolved (``cores``, ``base_time_s``, ``input`` and, for
    scatter stages, ``gather``); placeholders stay unexpanded.

    Args:
        text: YAML document in the pipeline grammar.

    Returns:
        The parsed, validated spec.

    Raises:
        ConfigError: Syntax error, unknown field or missing required field.
        SpecValidationError: The document parses but breaks a stage or
            pipeline invariant.
    """
    document = load_config_yaml(text)
    try:
        validated = PIPELINE_SCHEMA(document)
    except vol.Invalid as exc:
        raise config_error_from_invalid(exc) from exc

    stages: list[StageSpec] = []
    previous = INPUT_DATASET
    for raw in validated[CONF_STAGES]:
        mode = raw[CONF_MODE]
        gather = raw.get(CONF_GATHER)
        if mode == MODE_SCATTER and gather is None:
            gather = GATHER_RECORDS
        stage = StageSpec(
            id=raw[CONF_ID],
            mode=mode,
            command_template=raw[CONF_COMMAND],
            expected_outputs=tuple(raw[CONF_OUTPUTS]),
            input=raw.get(CONF_INPUT, previous),
            log_glob=raw.get(CONF_LOGS),
            resources=StageResources(cores=raw[CONF_CORES], base_time_s=raw[CONF_BASE_TIME_S]),
            gather=gather,
            format=raw.get(CONF_FORMAT),
        )
        stages.append(stage)
        previous = stage.id

    spec = PipelineSpec(
        name=validated[CONF_NAME],
        stages=tuple(stages),
        workdir_root=validated.get(CONF_WORKDIR_ROOT),
    )

    violations = validate_spec(spec)
    if violations:
        raise SpecValidationError(violations)

    LOGGER.debug("Parsed pipeline %s with stages %s", spec.name, spec.stage_ids)
    return spec


def load_pipeline_spec(path: Path | str) -> PipelineSpec:
    """Read and parse a pipeline document from disk."""
    return parse_pipeline_spec(Path(path).read_text(encoding="utf-8"))


def pipeline_spec_to_dict(spec: PipelineSpec) -> dict[str, Any]:
    """
    Convert a spec back to its document form.

    Every resolved default is written out, so parsing the result yields an
    equal spec.
    """
    stages: list[dict[str, Any]] = []
    for stage in spec.stages:
        raw: dict[str, Any] = {
            CONF_ID: stage.id,
            CONF_MODE: stage.mode,
            CONF_INPUT: stage.input,
            CONF_COMMAND: stage.command_template,
            CONF_OUTPUTS: list(stage.expected_outputs),
            CONF_CORES: stage.resources.cores,
            CONF_BASE_TIME_S: float(stage.resources.base_time_s),
        }
        if stage.log_glob is not None:
            raw[CONF_LOGS] = stage.log_glob
        if stage.gather is not None:
            raw[CONF_GATHER] = stage.gather
        if stage.format is not None:
            raw[CONF_FORMAT] = stage.format
        stages.append(raw)

    document: dict[str, Any] = {CONF_NAME: spec.name}
    if spec.workdir_root is not None:
        document[CONF_WORKDIR_ROOT] = spec.workdir_root
    document[CONF_STAGES] = stages
    return document


def serialize_pipeline_spec(spec: PipelineSpec) -> str:
    """Render a spec as a YAML pipeline document."""
    return dict_to_yaml(pipeline_spec_to_dict(spec))


__all__ = ["load_pipeline_spec", "parse_pipeline_spec", "pipeline_spec_to_dict", "serialize_pipeline_spec"]
