import csv
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from miner.csvexport import CsvFormatError, parse_result, to_csv
from miner.engine.aggregate import Row


def test_single_keyed_row():
    assert to_csv("o[p1] = 3\n") == "o,p1,3\r\n"


def test_zero_key_weighted_row():
    assert to_csv("t[] = a weight 9\n", header=True) == "output,value,weight\r\nt,a,9\r\n"


def test_empty_input_with_header():
    assert to_csv("", header=True) == "output,value,weight\r\n"
    assert to_csv("") == ""


def test_shorter_rows_are_padded():
    text = "a[x][y] = 1\nb[z] = 2\nc[] = 3\n"
    assert to_csv(text, header=True) == (
        "output,key1,key2,value\r\n" "a,x,y,1\r\n" "b,z,,2\r\n" "c,,,3\r\n"
    )


def test_weight_column_only_for_weighted_outputs():
    text = "s[] = x\nt[] = b weight 9\nt[] = c weight -1.5e-07\n"
    assert to_csv(text) == "s,x,\r\nt,b,9\r\nt,c,-1.5e-07\r\n"


def test_plain_value_that_looks_weighted():
    # s has an unweighted row, so its suffix is part of the value
    assert to_csv("s[] = a weight 1\ns[] = b\n") == "s,a weight 1\r\ns,b\r\n"


def test_quoting():
    assert to_csv('o[a,b] = say "hi"\n') == 'o,"a,b","say ""hi"""\r\n'


def test_row_order_is_preserved():
    assert to_csv("z[] = 1\na[] = 2\n") == "z,1\r\na,2\r\n"


@pytest.mark.parametrize("text,lineno", [
    ("o[] = 1\nthis is not a row\n", 2),
    ("o[a = 1\n", 1),
    ("o[a]= 1\n", 1),
    ("o = 1\n", 1),
    ("o[] = 1\n[] = 2\n", 2),
    ("o[] = 1\no[] = a\0b\n", 2),
])
def test_malformed_input_names_the_line(text, lineno):
    with pytest.raises(CsvFormatError) as exc:
        to_csv(text)
    assert exc.value.lineno == lineno and f"line {lineno}" in str(exc.value)


_name = st.from_regex(r"[a-z_][a-z0-9_]{0,4}", fullmatch=True)
_key = st.text(st.characters(blacklist_characters="]\n\0", blacklist_categories=("Cs",)), min_size=1, max_size=5)
_value = st.text(st.characters(blacklist_characters="\n\0", blacklist_categories=("Cs",)), max_size=6)
_weight = st.one_of(st.integers(-10, 10).map(str), st.sampled_from(["0.5", "-0.0", "1e+16", "inf", "-inf"]))


@st.composite
def results(draw):
    """Rendered result text from a handful of outputs, each weighted or not."""
    rows = []
    for name in draw(st.sets(_name, max_size=4)):
        weighted = draw(st.booleans())
        for _ in range(draw(st.integers(1, 4))):
            keys = tuple(draw(st.lists(_key, max_size=2)))
            value = draw(_value)
            if not weighted:
                value = value.replace(" weight ", " ")
            rows.append(Row(name, keys, value, draw(_weight) if weighted else None))
    rows.sort(key=Row.sort_key)
    return "".join(r.line() + "\n" for r in rows), rows


@settings(max_examples=300, deadline=None)
@given(results())
def test_csv_reads_back_to_the_same_rows(case):
    text, rows = case
    parsed = parse_result(text)
    assert [(r.name, r.keys, r.value, r.weight) for r in parsed] == [
        (r.name, r.keys, r.value, r.weight) for r in rows
    ]
    table = list(csv.reader(io.StringIO(to_csv(text), newline="")))
    assert len(table) == len(rows)
    arity = max((len(r.keys) for r in rows), default=0)
    weighted = any(r.weight is not None for r in rows)
    for cells, r in zip(table, rows):
        assert cells[0] == r.name
        assert [c for c in cells[1:1 + arity] if c] == [k for k in r.keys]
        assert cells[1 + arity] == r.value
        if weighted:
            assert cells[2 + arity] == (r.weight or "")
