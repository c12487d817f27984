"""YAML loading and dumping for config documents."""

from __future__ import annotations

from typing import Any

import yaml

from seqpipe.exceptions import ConfigError


def load_config_yaml(yaml_string: str) -> dict[str, Any]:
    """
    Parse a YAML config document into a mapping.

    Args:
        yaml_string: The document text.

    Returns:
        The top-level mapping.

    Raises:
        ConfigError: On syntax errors (with 1-based line and column) or when
            the document is empty or not a mapping.
    """
    if not yaml_string or not yaml_string.strip():
        raise ConfigError("Config document is empty", error_key="yaml_empty")

    try:
        parsed = yaml.safe_load(yaml_string)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark is not None else None
        column = mark.column + 1 if mark is not None else None
        raise ConfigError(
            f"YAML syntax error: {exc.problem or exc}",
            line=line,
            column=column,
            error_key="yaml_parse_error",
        ) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML syntax error: {exc}", error_key="yaml_parse_error") from exc

    if not isinstance(parsed, dict):
        raise ConfigError("Config document must be a mapping", error_key="yaml_not_dict")

    return parsed


def dict_to_yaml(data: dict[str, Any]) -> str:
    """
    Convert a dictionary to YAML string.

    Key order is preserved so a dumped document reads in declaration order.

    Args:
        data: The dictionary to convert.

    Returns:
        YAML string representation of the data.
    """
    if not data:
        return ""
    return yaml.safe_dump(data, default_flow_style=False, allow_unicode=True, sort_keys=False)


__all__ = ["dict_to_yaml", "load_config_yaml"]
