"""Utility functions for seqpipe."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
import csv
from pathlib import Path
import re
import shutil
from typing import Any, TextIO

from seqpipe.const import PLACEHOLDER_PART
from seqpipe.exceptions import TableFormatError

# Single-brace placeholders: {input}, {output}, {part}, {workdir}
PLACEHOLDER_PATTERN = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")

# {part} plus at most one separator in front of it, for gathered file names
_PART_IN_NAME = re.compile(r"[._-]?\{" + PLACEHOLDER_PART + r"\}")

# Tab-separated tables: one row per line, cells quoted only when needed
TSV_DIALECT = "seqpipe-tsv"
csv.register_dialect(
    TSV_DIALECT, delimiter="\t", quotechar='"', quoting=csv.QUOTE_MINIMAL, lineterminator="\n", strict=True
)


def find_placeholders(template: str) -> list[str]:
    """
    Return placeholder names in the order they appear in a template.

    Args:
        template: Text such as ``"tool --in {input} --out {output}"``.

    Returns:
        Placeholder names, duplicates included.
    """
    return PLACEHOLDER_PATTERN.findall(template)


def expand_template(template: str, values: Mapping[str, Any]) -> str:
    """
    Expand every placeholder in a template.

    Placeholders without a value are left untouched so the caller can detect
    them with :func:`find_placeholders` and report the stage that owns them.

    Args:
        template: Text containing single-brace placeholders.
        values: Placeholder name to replacement value.

    Returns:
        The expanded text.
    """

    def _replace(match: re.Match[str]) -> str:
        name = match.group(1)
        if name in values and values[name] is not None:
            return str(values[name])
        return match.group(0)

    return PLACEHOLDER_PATTERN.sub(_replace, template)


def gathered_name(output_template: str) -> str:
    """
    Return the file name a gathered scatter output is stored under.

    ``"{workdir}/hits_{part}.tsv"`` becomes ``"hits.tsv"``.
    """
    name = output_template.replace("\\", "/").rsplit("/", 1)[-1]
    return _PART_IN_NAME.sub("", name)


def remove_tree(path: Path) -> None:
    """Delete a directory tree if it exists."""
    if path.exists():
        shutil.rmtree(path)


def move_into(source: Path, destination_dir: Path) -> Path:
    """
    Move a file into a directory, replacing any file of the same name.

    Returns:
        The new path.
    """
    destination_dir.mkdir(parents=True, exist_ok=True)
    target = destination_dir / source.name
    if target.exists():
        target.unlink()
    shutil.move(str(source), str(target))
    return target


def read_tsv_rows(lines: Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    """
    Yield the data rows of a tab-separated table with their 1-based line numbers.

    Blank lines and ``#`` lines are skipped. Every row is one physical line;
    quoted cells follow :data:`TSV_DIALECT`.

    Raises:
        TableFormatError: A line is not a valid row.
    """
    for number, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            rows = list(csv.reader([line], dialect=TSV_DIALECT))
        except csv.Error as exc:
            raise TableFormatError(str(exc), line=number) from exc
        yield number, rows[0]


def tsv_writer(stream: TextIO) -> Any:
    """Return a :func:`csv.writer` for :data:`TSV_DIALECT`."""
    return csv.writer(stream, dialect=TSV_DIALECT)
