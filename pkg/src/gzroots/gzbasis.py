"""Gelfand-Zetlin patterns: validation, enumeration, dimension, Cartan weights.

A pattern for sl(N) is a triangular integer array; row j (1 <= j <= N) has j
entries and row N is fixed by the module.  Adjacent rows interlace:

    p[i][j+1] >= p[i][j] > p[i+1][j+1]

Only differences of entries enter any formula, so top rows are accepted with
arbitrary integers (the conventional normalization sets the last entry to 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterator


class EmptyModule(ValueError):
    pass


@dataclass(frozen=True)
class TopRow:
    values: tuple

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise ValueError("need at least two top-row entries")
        if any(a <= b for a, b in zip(vals, vals[1:])):
            raise EmptyModule(f"top row {vals} is not strictly decreasing")

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class GZPattern:
    """Triangular array stored top row first: rows[0] has N entries, rows[N-1] one."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows[0])
        if [len(r) for r in rows] != list(range(n, 0, -1)):
            raise ValueError("rows must shrink by one entry from the top")

    @property
    def n(self) -> int:
        return len(self.rows[0])

    def row(self, j: int) -> tuple:
        """Row j in math indexing: row N is the top."""
        return self.rows[self.n - j]

    def p(self, i: int, j: int) -> int:
        """Entry p_{ij}, 1 <= i <= j <= N."""
        return self.rows[self.n - j][i - 1]

    def replace_row(self, j: int, new_row) -> "GZPattern":
        rows = list(self.rows)
        rows[self.n - j] = tuple(int(v) for v in new_row)
        return GZPattern(tuple(rows))

    def shift_entry(self, i: int, j: int, delta: int) -> "GZPattern":
        row = list(self.row(j))
        row[i - 1] += delta
        return self.replace_row(j, row)

    def flatten(self) -> tuple:
        return tuple(v for r in self.rows for v in r)

    def as_nested(self) -> list:
        return [list(r) for r in self.rows]

    def __str__(self):
        return json.dumps(self.as_nested())


def parse_pattern(text: str) -> GZPattern:
    """Parse the nested text form, e.g. '[[4,2,0],[3,2],[3]]' (top row first)."""
    return GZPattern(tuple(tuple(r) for r in json.loads(text)))


def validate_pattern(p: GZPattern) -> bool:
    """Check every interlacing inequality p_{i,j+1} >= p_{ij} > p_{i+1,j+1}."""
    for j in range(1, p.n):
        lower, upper = p.row(j), p.row(j + 1)
        for i in range(1, j + 1):
            if not (upper[i - 1] >= lower[i - 1] > upper[i]):
                return False
    return True


def _rows_below(upper: tuple) -> Iterator[tuple]:
    """All rows of length len(upper)-1 interlacing with the given row."""
    k = len(upper) - 1
    def rec(i, prefix):
        if i == k:
            yield tuple(prefix)
            return
        # strict lower bound from the right neighbour above, inclusive upper bound
        lo, hi = upper[i + 1] + 1, upper[i]
        prev = prefix[-1] if prefix else None
        for v in range(lo, hi + 1):
            if prev is not None and v >= prev:
                continue
            yield from rec(i + 1, prefix + [v])
    yield from rec(0, [])


@dataclass(frozen=True)
class ModuleBasis:
    top: TopRow
    states: tuple
    index: dict = field(compare=False, repr=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    def index_of(self, p: GZPattern) -> int:
        return self.index[p.flatten()]

    def __iter__(self):
        return iter(self.states)


def enumerate_basis(top: TopRow) -> ModuleBasis:
    """All valid patterns under the given top row, in lexicographic order."""
    if not isinstance(top, TopRow):
        top = TopRow(tuple(top))
    patterns = []

    def build(rows):
        if len(rows[-1]) == 1:
            patterns.append(GZPattern(tuple(rows)))
            return
        for nxt in _rows_below(rows[-1]):
            build(rows + [nxt])

    build([top.values])
    if not patterns:
        raise EmptyModule(f"no valid patterns for top row {top.values}")
    patterns.sort(key=lambda p: p.flatten())
    index = {p.flatten(): i for i, p in enumerate(patterns)}
    return ModuleBasis(top, tuple(patterns), index)


def generic_dimension(top: TopRow) -> int:
    """Product formula over top-row differences, exact integer arithmetic."""
    if not isinstance(top, TopRow):
        top = TopRow(tuple(top))
    vals, n = top.values, top.n
    num = 1
    for i in range(n - 1):
        for j in range(i + 1, n):
            num *= vals[i] - vals[j]
    den = 1
    for i in range(1, n):
        den *= factorial(n - i)
    result = Fraction(num, den)
    assert result.denominator == 1, "dimension formula must be integral"
    return int(result)


def cartan_exponent(p: GZPattern, l: int) -> int:
    """Exponent h with k_l acting as q^{+h} (and k_l^{-1} as q^{-h})."""
    if not 1 <= l <= p.n - 1:
        raise ValueError(f"l={l} out of range for rank {p.n}")
    s_l = sum(p.row(l))
    s_up = sum(p.row(l + 1))
    s_dn = sum(p.row(l - 1)) if l > 1 else 0
    return 2 * s_l - s_up - s_dn - 1


def weight_table(basis: ModuleBasis) -> dict:
    """Multiplicities of Cartan exponent vectors across the basis."""
    table: dict = {}
    n = basis.top.n
    for p in basis:
        key = tuple(cartan_exponent(p, l) for l in range(1, n))
        table[key] = table.get(key, 0) + 1
    return table
