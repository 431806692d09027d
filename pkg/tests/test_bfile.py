from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from popstack.bfile import (
    format_bfile,
    format_matrix,
    matrix_column,
    read_bfile,
    read_matrix,
    write_bfile,
    write_matrix,
)


@settings(max_examples=50, deadline=None)
@given(
    values=st.lists(st.integers(min_value=-(10**80), max_value=10**80), min_size=1, max_size=30),
    offset=st.integers(0, 3),
)
def test_bfile_roundtrip(tmp_path_factory, values, offset):
    path = tmp_path_factory.mktemp("b") / "seq.b"
    write_bfile(path, values, offset)
    assert read_bfile(path) == (offset, values)


def test_bfile_format():
    assert format_bfile([1, 1, 3]) == "1 1\n2 1\n3 3\n"


def test_bfile_comments_and_fractions(tmp_path):
    path = tmp_path / "x.b"
    path.write_text("# header\n0 1/2\n\n1 3  # trailing\n")
    assert read_bfile(path) == (0, [Fraction(1, 2), 3])


def test_bfile_gaps_rejected(tmp_path):
    path = tmp_path / "x.b"
    path.write_text("1 1\n3 3\n")
    with pytest.raises(ValueError, match="index 3"):
        read_bfile(path)


def test_bfile_empty_rejected(tmp_path):
    path = tmp_path / "x.b"
    path.write_text("# nothing\n")
    with pytest.raises(ValueError):
        read_bfile(path)


def test_matrix_roundtrip(tmp_path):
    cols = {1: [1, 1, 1], 2: [0, 1, 2], 3: [0, 0, 0]}
    text = format_matrix(cols)
    assert text == "1 1 1\n2 1 1\n2 2 1\n3 1 1\n3 2 2\n"
    path = tmp_path / "m.txt"
    write_matrix(path, cols)
    m = read_matrix(path)
    assert matrix_column(m, 2) == [0, 1, 2]
    assert matrix_column(m, 3) == [0, 0, 0]
