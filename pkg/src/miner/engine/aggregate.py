"""Mergeable output aggregators and the text rendering of their final state.

Numeric totals are kept exactly: int sums as Python ints, float sums as
integers scaled by 2**1074 (every finite double is an integer multiple of
2**-1074). Merging is therefore associative and commutative bit for bit, and
results do not depend on how projects were split across workers.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from ..errors import QueryRuntimeError

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1
FLOAT_SCALE = 2**1074

Number = Union[int, float]


def format_float(x: float) -> str:
    """Shortest round-tripping decimal, with ``.0`` on integral values."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    r = repr(x)
    if "." not in r and "e" not in r:
        r += ".0"
    return r


def render_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def render_key(v, pos=(0, 0)) -> str:
    text = render_scalar(v)
    if text == "":
        raise QueryRuntimeError("output key is an empty string", pos)
    if "]" in text or "\n" in text:
        raise QueryRuntimeError(f"output key {text!r} contains ']' or a newline", pos)
    return text


def _scaled(x: float) -> int:
    p, q = x.as_integer_ratio()
    return p * (FLOAT_SCALE // q)


@dataclass(frozen=True)
class OutputSpec:
    name: str
    kind: str  # sum, mean, collection, set, top
    value_type: str
    weight_type: Optional[str] = None
    top_n: Optional[int] = None

    @classmethod
    def from_decl(cls, decl) -> "OutputSpec":
        return cls(
            decl.name, decl.agg_kind, str(decl.value_type),
            str(decl.weight_type) if decl.weight_type is not None else None, decl.top_n,
        )


@dataclass
class Total:
    """Exact running total of ints, or of floats held as scaled integers."""

    is_float: bool
    total: int = 0
    count: int = 0
    pos_inf: bool = False
    neg_inf: bool = False
    nan: bool = False

    def add(self, v: Number) -> None:
        self.count += 1
        if not self.is_float:
            self.total += v
            return
        v = float(v)
        if math.isnan(v):
            self.nan = True
        elif math.isinf(v):
            if v > 0:
                self.pos_inf = True
            else:
                self.neg_inf = True
        else:
            self.total += _scaled(v)

    def merge(self, other: "Total") -> None:
        self.total += other.total
        self.count += other.count
        self.pos_inf |= other.pos_inf
        self.neg_inf |= other.neg_inf
        self.nan |= other.nan

    def _special(self) -> Optional[float]:
        if self.nan or (self.pos_inf and self.neg_inf):
            return math.nan
        if self.pos_inf:
            return math.inf
        if self.neg_inf:
            return -math.inf
        return None

    def sum_value(self) -> Number:
        if not self.is_float:
            return self.total
        special = self._special()
        if special is not None:
            return special
        return _divide(self.total, FLOAT_SCALE)

    def mean_value(self) -> float:
        special = self._special()
        if special is not None:
            return special
        return _divide(self.total, self.count * (FLOAT_SCALE if self.is_float else 1))


def _divide(a: int, b: int) -> float:
    # int / int is correctly rounded in CPython
    try:
        return a / b
    except OverflowError:
        return math.inf if (a > 0) == (b > 0) else -math.inf


def _top_key(item: tuple[Number, str]):
    weight, value = item
    # the rendered weight separates 0.0 from -0.0, keeping the order total
    return (-weight, value, render_scalar(weight))


@dataclass
class AggregateState:
    specs: dict[str, OutputSpec]
    tables: dict[str, dict[tuple[str, ...], object]] = field(default_factory=dict)

    @classmethod
    def empty(cls, specs) -> "AggregateState":
        return cls(dict(specs), {name: {} for name in specs})

    def __eq__(self, other) -> bool:
        return isinstance(other, AggregateState) and self.specs == other.specs and self.tables == other.tables


def _new_acc(spec: OutputSpec):
    if spec.kind in ("sum", "mean"):
        return Total(spec.value_type == "float")
    if spec.kind == "collection":
        return Counter()
    if spec.kind == "set":
        return set()
    return []


def agg_update(state: AggregateState, output: str, keys: tuple[str, ...], value, weight=None,
               pos=(0, 0)) -> None:
    """Add one emission; keys must already be rendered with :func:`render_key`."""
    spec = state.specs[output]
    table = state.tables.setdefault(output, {})
    acc = table.get(keys)
    if acc is None:
        acc = table[keys] = _new_acc(spec)
    kind = spec.kind
    if kind in ("sum", "mean"):
        if spec.value_type == "float":
            value = float(value)
        acc.add(value)
        if kind == "sum" and not acc.is_float and not INT64_MIN <= acc.total <= INT64_MAX:
            raise QueryRuntimeError(f"integer overflow in sum output '{output}'", pos)
        return
    if spec.value_type == "float":
        value = float(value)
    text = render_scalar(value)
    if "\n" in text:
        raise QueryRuntimeError(f"value emitted to '{output}' contains a newline", pos)
    if kind == "collection":
        acc[text] += 1
    elif kind == "set":
        acc.add(text)
    else:
        if weight is None:
            raise QueryRuntimeError(f"top output '{output}' needs a weight", pos)
        if spec.weight_type == "float":
            weight = float(weight)
        if isinstance(weight, float) and math.isnan(weight):
            raise QueryRuntimeError(f"weight emitted to '{output}' is nan", pos)
        acc.append((weight, text))
        acc.sort(key=_top_key)
        del acc[spec.top_n:]


def agg_merge(a: AggregateState, b: AggregateState) -> AggregateState:
    """Combine two states into a new one; neither input is modified."""
    if a.specs != b.specs:
        raise ValueError("cannot merge states of different programs")
    out = AggregateState.empty(a.specs)
    for src in (a, b):
        for name, table in src.tables.items():
            spec = a.specs[name]
            dst = out.tables.setdefault(name, {})
            for keys, acc in table.items():
                cur = dst.get(keys)
                if cur is None:
                    cur = dst[keys] = _new_acc(spec)
                _merge_into(spec, cur, acc)
    return out


def merge_into(dst: AggregateState, src: AggregateState) -> None:
    """In-place variant of :func:`agg_merge` used by workers."""
    for name, table in src.tables.items():
        spec = dst.specs[name]
        target = dst.tables.setdefault(name, {})
        for keys, acc in table.items():
            cur = target.get(keys)
            if cur is None:
                cur = target[keys] = _new_acc(spec)
            _merge_into(spec, cur, acc)


def _merge_into(spec: OutputSpec, cur, acc) -> None:
    if spec.kind in ("sum", "mean"):
        cur.merge(acc)
    elif spec.kind == "collection":
        cur.update(acc)
    elif spec.kind == "set":
        cur |= acc
    else:
        cur.extend(acc)
        cur.sort(key=_top_key)
        del cur[spec.top_n:]


@dataclass(frozen=True)
class Row:
    name: str
    keys: tuple[str, ...]
    value: str
    weight: Optional[str] = None

    def line(self) -> str:
        keys = "".join(f"[{k}]" for k in self.keys) or "[]"
        tail = f" weight {self.weight}" if self.weight is not None else ""
        return f"{self.name}{keys} = {self.value}{tail}"

    def sort_key(self):
        return (self.name, self.keys, self.value, self.weight or "")


@dataclass(frozen=True)
class OverflowRow:
    name: str
    keys: tuple[str, ...]

    def message(self) -> str:
        keys = "".join(f"[{k}]" for k in self.keys) or "[]"
        return f"sum {self.name}{keys} overflows 64-bit int"


def table_rows(state: AggregateState) -> tuple[list[Row], list[OverflowRow]]:
    rows: list[Row] = []
    overflow: list[OverflowRow] = []
    for name, table in state.tables.items():
        spec = state.specs[name]
        for keys, acc in table.items():
            rows.extend(_rows_for(spec, name, keys, acc, overflow))
    rows.sort(key=Row.sort_key)
    overflow.sort(key=lambda o: (o.name, o.keys))
    return rows, overflow


def _rows_for(spec, name, keys, acc, overflow) -> Iterator[Row]:
    if spec.kind == "sum":
        v = acc.sum_value()
        if isinstance(v, int) and not INT64_MIN <= v <= INT64_MAX:
            overflow.append(OverflowRow(name, keys))
            return
        yield Row(name, keys, render_scalar(v))
    elif spec.kind == "mean":
        if acc.count:
            yield Row(name, keys, format_float(acc.mean_value()))
    elif spec.kind == "collection":
        for text, n in acc.items():
            for _ in range(n):
                yield Row(name, keys, text)
    elif spec.kind == "set":
        for text in acc:
            yield Row(name, keys, text)
    else:
        for weight, text in acc:
            yield Row(name, keys, text, render_scalar(weight))


def render_output(state: AggregateState) -> str:
    """Final text: one sorted line per row, LF terminated; empty state gives ''."""
    rows, _ = table_rows(state)
    return "".join(r.line() + "\n" for r in rows)
