"""Lexicographic order on vectors of extended reals.

Every other module compares objective values, bounds and reduced costs
through the helpers defined here.  Entries are IEEE floats, which encode
-inf and +inf exactly, so comparisons against infinite sentinels are exact.
The one indeterminate case, inf + (-inf), is rejected explicitly.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

NEG_INF = float("-inf")
POS_INF = float("inf")

#: Default absolute margin for sign / equality tests on lex entries.
DEFAULT_EPS = 1e-6


class LexValue:
    """An immutable vector of extended reals compared lexicographically.

    The length is fixed per problem instance (one entry per objective
    level) and must agree between any two values that are compared or
    added together.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[float]):
        values = tuple(float(e) for e in entries)
        for e in values:
            if math.isnan(e):
                raise ValueError("NaN entry in LexValue")
        self.entries = values

    @classmethod
    def zeros(cls, m: int) -> "LexValue":
        return cls((0.0,) * m)

    @classmethod
    def neg_infinite(cls, m: int) -> "LexValue":
        return cls((NEG_INF,) * m)

    @classmethod
    def pos_infinite(cls, m: int) -> "LexValue":
        return cls((POS_INF,) * m)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __repr__(self) -> str:
        return f"LexValue({list(self.entries)!r})"

    def __hash__(self) -> int:
        return hash(self.entries)

    # Tuple comparison on floats is exactly the lexicographic order,
    # including against the infinite sentinels.
    def __eq__(self, other) -> bool:
        return isinstance(other, LexValue) and self.entries == other.entries

    def __lt__(self, other: "LexValue") -> bool:
        self._check_length(other)
        return self.entries < other.entries

    def __le__(self, other: "LexValue") -> bool:
        self._check_length(other)
        return self.entries <= other.entries

    def __gt__(self, other: "LexValue") -> bool:
        self._check_length(other)
        return self.entries > other.entries

    def __ge__(self, other: "LexValue") -> bool:
        self._check_length(other)
        return self.entries >= other.entries

    def __add__(self, other: "LexValue") -> "LexValue":
        return lex_add(self, other)

    def __sub__(self, other: "LexValue") -> "LexValue":
        self._check_length(other)
        return lex_add(self, lex_scale(other, -1.0))

    def _check_length(self, other: "LexValue") -> None:
        if len(self.entries) != len(other.entries):
            raise ValueError(
                f"LexValue length mismatch: {len(self.entries)} vs {len(other.entries)}"
            )


def lex_compare(a: LexValue, b: LexValue) -> int:
    """Compare lexicographically: -1 (Less), 0 (Equal) or +1 (Greater)."""
    a._check_length(b)
    if a.entries < b.entries:
        return -1
    if a.entries > b.entries:
        return 1
    return 0


def lex_add(a: LexValue, b: LexValue) -> LexValue:
    """Entrywise sum; inf + (-inf) is a contract violation."""
    a._check_length(b)
    out = []
    for x, y in zip(a.entries, b.entries):
        s = x + y
        if math.isnan(s):
            raise ValueError("indeterminate inf + (-inf) in lex_add")
        out.append(s)
    return LexValue(out)


def lex_scale(a: LexValue, k: float) -> LexValue:
    """Entrywise scalar multiple; scaling by 0 zeroes infinite entries."""
    if k == 0.0:
        return LexValue.zeros(len(a))
    return LexValue(x * k for x in a.entries)


def lex_is_positive(a: LexValue | Sequence[float], eps: float = DEFAULT_EPS) -> bool:
    """True iff `a` is lexicographically positive once entries within
    `eps` of zero are snapped to zero."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    for e in a:
        if e > eps:
            return True
        if e < -eps:
            return False
    return False


def lex_sign(a: LexValue | Sequence[float], eps: float = DEFAULT_EPS) -> int:
    """Sign of `a` under the same epsilon snapping as lex_is_positive."""
    for e in a:
        if e > eps:
            return 1
        if e < -eps:
            return -1
    return 0


def lex_compare_eps(a: LexValue, b: LexValue, eps: float = DEFAULT_EPS) -> int:
    """Lexicographic comparison where per-entry differences within `eps`
    count as ties.  Used for pruning decisions on floating-point bounds."""
    a._check_length(b)
    for x, y in zip(a.entries, b.entries):
        d = x - y
        if x == y:  # covers equal infinities, where d would be NaN
            continue
        if d > eps:
            return 1
        if d < -eps:
            return -1
    return 0
