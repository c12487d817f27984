"""Tests for the shared tab-separated table helpers."""

from __future__ import annotations

import io

import pytest

from seqpipe.exceptions import TableFormatError
from seqpipe.utils import read_tsv_rows, tsv_writer

pytestmark = pytest.mark.unit


def test_read_tsv_rows_skips_comments_and_blank_lines() -> None:
    lines = ["#a\tb\n", "\n", "x\ty\n", "  \n", 'p\t"q\tr"\t\n']

    assert list(read_tsv_rows(lines)) == [(3, ["x", "y"]), (5, ["p", "q\tr", ""])]


@pytest.mark.parametrize("line", ['x\t"open\n', 'x\t"a"b\n'])
def test_read_tsv_rows_rejects_bad_quoting(line: str) -> None:
    with pytest.raises(TableFormatError) as err:
        list(read_tsv_rows(["ok\trow\n", line]))

    assert err.value.line == 2
    assert str(err.value).startswith("line 2: ")
    assert err.value.error_key == "table_malformed"


def test_tsv_writer_quotes_only_when_needed() -> None:
    stream = io.StringIO()
    writer = tsv_writer(stream)
    writer.writerow(["g1", 'say "hi"', "tab\there", 3])
    writer.writerow(["plain", "", "x", 0])

    assert stream.getvalue() == 'g1\t"say ""hi"""\t"tab\there"\t3\nplain\t\tx\t0\n'
    assert [row for _, row in read_tsv_rows(io.StringIO(stream.getvalue()))] == [
        ["g1", 'say "hi"', "tab\there", "3"],
        ["plain", "", "x", "0"],
    ]
