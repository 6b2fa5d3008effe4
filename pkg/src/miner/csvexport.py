"""Convert rendered query results into CSV."""
from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from typing import Optional

from .errors import FormatError

_NUMBER = r"-?(?:\d+(?:\.\d+)?(?:e[+-]?\d+)?|inf|nan)"
_WEIGHT = re.compile(rf"^(.*) weight ({_NUMBER})$", re.DOTALL)
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class CsvFormatError(FormatError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class ResultLine:
    name: str
    keys: tuple[str, ...]
    value: str
    weight: Optional[str] = None


def parse_line(line: str, lineno: int = 1) -> ResultLine:
    m = _NAME.match(line)
    if not m:
        raise CsvFormatError(lineno, "expected an output name")
    name = m.group()
    i = m.end()
    keys: list[str] = []
    if line.startswith("[] = ", i):
        i += 2
    else:
        while i < len(line) and line[i] == "[":
            j = line.find("]", i)
            if j < 0:
                raise CsvFormatError(lineno, "unclosed '['")
            if j == i + 1:
                raise CsvFormatError(lineno, "empty key")
            keys.append(line[i + 1:j])
            i = j + 1
        if not keys:
            raise CsvFormatError(lineno, "expected '[' after the output name")
    if not line.startswith(" = ", i):
        raise CsvFormatError(lineno, "expected ' = ' after the keys")
    rest = line[i + 3:]
    weight = None
    w = _WEIGHT.match(rest)
    if w:
        rest, weight = w.group(1), w.group(2)
    return ResultLine(name, tuple(keys), rest, weight)


def parse_result(text: str) -> list[ResultLine]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    rows = [parse_line(line, n) for n, line in enumerate(lines, 1)]
    # top outputs weight every row; a name with any unweighted row is not one
    plain = {r.name for r in rows if r.weight is None}
    return [
        ResultLine(r.name, r.keys, f"{r.value} weight {r.weight}", None)
        if r.weight is not None and r.name in plain else r
        for r in rows
    ]


def to_csv(text: str, header: bool = False) -> str:
    """CSV with columns output,key1..keyN,value[,weight]; row order is kept."""
    rows = parse_result(text)
    arity = max((len(r.keys) for r in rows), default=0)
    weighted = any(r.weight is not None for r in rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    if header:
        cols = ["output", *(f"key{i}" for i in range(1, arity + 1)), "value"]
        writer.writerow(cols + ["weight"] if weighted or not rows else cols)
    for n, r in enumerate(rows, 1):
        if "\0" in r.value or any("\0" in k for k in r.keys):
            raise CsvFormatError(n, "NUL characters cannot be written to CSV")
        out = [r.name, *r.keys, *([""] * (arity - len(r.keys))), r.value]
        if weighted:
            out.append(r.weight if r.weight is not None else "")
        writer.writerow(out)
    return buf.getvalue()
