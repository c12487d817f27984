"""
Voluptuous schemas for pipeline config documents.

A pipeline document looks like::

    name: demo
    workdir_root: runs          # optional
    stages:
      - id: filter
        mode: single
        command: python -m seqpipe filter --input {input} --output {output}
        outputs: ["{workdir}/filtered.fastq"]
      - id: classify
        mode: scatter
        input: filter           # optional, defaults to the previous stage
        command: ... --reads {input} --output {workdir}/assign_{part}.tsv
        outputs: ["{workdir}/assign_{part}.tsv"]
        gather: rows            # optional, scatter only
        cores: 1                # optional
        base_time_s: 1.0        # optional
        logs: "{workdir}/*.log" # optional
"""

from __future__ import annotations

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
    DEFAULT_BASE_TIME_S,
    DEFAULT_CORES,
)
from seqpipe.exceptions import ConfigError

IDENTIFIER = vol.All(str, vol.Match(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$", msg="expected an identifier"))


def _non_empty_str(value: object) -> str:
    """Accept a string with at least one non-blank character."""
    if not isinstance(value, str) or not value.strip():
        raise vol.Invalid("expected a non-empty string")
    return value


STAGE_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_ID): IDENTIFIER,
        vol.Required(CONF_MODE): vol.All(str, vol.Lower),
        vol.Required(CONF_COMMAND): _non_empty_str,
        vol.Required(CONF_OUTPUTS): [_non_empty_str],
        vol.Optional(CONF_CORES, default=DEFAULT_CORES): int,
        vol.Optional(CONF_BASE_TIME_S, default=DEFAULT_BASE_TIME_S): vol.Coerce(float),
        vol.Optional(CONF_LOGS): _non_empty_str,
        vol.Optional(CONF_INPUT): IDENTIFIER,
        vol.Optional(CONF_GATHER): vol.All(str, vol.Lower),
        vol.Optional(CONF_FORMAT): vol.All(str, vol.Lower),
    },
    extra=vol.PREVENT_EXTRA,
)

PIPELINE_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_NAME): IDENTIFIER,
        vol.Required(CONF_STAGES): [STAGE_SCHEMA],
        vol.Optional(CONF_WORKDIR_ROOT): _non_empty_str,
    },
    extra=vol.PREVENT_EXTRA,
)


def config_error_from_invalid(exc: vol.Invalid, error_class: type[ConfigError] = ConfigError) -> ConfigError:
    """
    Turn a voluptuous error into a ConfigError naming the offending field.

    Only the first error is reported; its path is rendered as
    ``stages[1].command``.
    """
    first = exc.errors[0] if isinstance(exc, vol.MultipleInvalid) and exc.errors else exc
    path = ""
    for part in first.path:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))

    if first.error_message == "extra keys not allowed":
        return error_class(f"Unknown field '{path}'", error_key="unknown_field")
    if first.error_message == "required key not provided":
        return error_class(f"Missing required field '{path}'", error_key="missing_field")
    return error_class(f"Invalid value for '{path}': {first.error_message}", error_key="invalid_value")


__all__ = ["IDENTIFIER", "PIPELINE_SCHEMA", "STAGE_SCHEMA", "config_error_from_invalid"]
