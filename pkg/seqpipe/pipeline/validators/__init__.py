"""
Validators package for pipeline configs.

This package contains the YAML loading helpers shared by all config
documents and the invariant checks for parsed pipeline specs.
"""

from __future__ import annotations

from .spec_validator import validate_spec
from .yaml_validator import dict_to_yaml, load_config_yaml

__all__ = [
    "dict_to_yaml",
    "load_config_yaml",
    "validate_spec",
]
