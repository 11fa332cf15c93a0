"""Eventually periodic points of one-sided sequence space and the basic maps on them.

A point ``(..., x_{-1}, x_0)`` of ``{0,...,J}^{Z_-}`` is stored as a primitive
period ``q`` repeated to the left of a finite suffix ``s``; its textual form
is ``(q)*s`` and the rightmost symbol of ``s`` is ``x_0``.

Words are plain tuples of ints written left to right, so the last entry of a
word is the symbol nearest to position 0.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator, Sequence

Word = tuple

_SEQ_RE = re.compile(r"^\s*\(([0-9]+)\)\*([0-9]*)\s*$")


def parse_word(text: str | Sequence[int]) -> Word:
    if isinstance(text, str):
        return tuple(int(c) for c in text.strip())
    return tuple(int(c) for c in text)


def format_word(word: Sequence[int]) -> str:
    return "".join(str(s) for s in word)


def _primitive_root(word: Word) -> Word:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True)
class SymbolSeq:
    """Eventually periodic point; always held in canonical form.

    Canonical means the period is primitive and the suffix cannot be shortened
    by rotating the period, so two instances are equal exactly when they
    describe the same sequence.
    """

    period: Word
    suffix: Word = ()
    J: int = 1

    def __post_init__(self):
        period = tuple(int(s) for s in self.period)
        suffix = tuple(int(s) for s in self.suffix)
        if not period:
            raise ValueError("period must be nonempty")
        if self.J < 1:
            raise ValueError("alphabet bound J must be >= 1")
        for s in period + suffix:
            if not 0 <= s <= self.J:
                raise ValueError(f"symbol {s} outside alphabet 0..{self.J}")
        period = _primitive_root(period)
        # ...q q (a, rest) with a == q[0] is ...q' q' rest for the left rotation q'
        while suffix and suffix[0] == period[0]:
            period = period[1:] + period[:1]
            suffix = suffix[1:]
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "suffix", suffix)

    @classmethod
    def parse(cls, text: str, J: int | None = None) -> "SymbolSeq":
        m = _SEQ_RE.match(text)
        if not m:
            raise ValueError(f"cannot parse point {text!r}; expected '(q)*s'")
        period, suffix = parse_word(m.group(1)), parse_word(m.group(2))
        if J is None:
            J = max(1, max(period + suffix))
        return cls(period, suffix, J)

    @classmethod
    def from_read_order(cls, prefix: Sequence[int], cycle: Sequence[int], J: int) -> "SymbolSeq":
        """Build from digits listed from x_0 leftwards: ``prefix`` then ``cycle`` forever."""
        return cls(tuple(reversed(cycle)), tuple(reversed(prefix)), J)

    def __str__(self) -> str:
        return f"({format_word(self.period)})*{format_word(self.suffix)}"

    def __repr__(self) -> str:
        return f"SymbolSeq('{self}', J={self.J})"

    @property
    def x0(self) -> int:
        return self.suffix[-1] if self.suffix else self.period[-1]

    def read(self) -> Iterator[int]:
        """Yield x_0, x_{-1}, x_{-2}, ... forever."""
        yield from reversed(self.suffix)
        rev = tuple(reversed(self.period))
        while True:
            yield from rev

    def last(self, n: int) -> Word:
        """The initial word of length n, i.e. (x_{-n+1}, ..., x_0)."""
        out = []
        it = self.read()
        for _ in range(n):
            out.append(next(it))
        return tuple(reversed(out))

    def append(self, *symbols: int) -> "SymbolSeq":
        return SymbolSeq(self.period, self.suffix + tuple(symbols), self.J)

    def expanded(self, reps: int = 1) -> Word:
        """Period repeated ``reps`` times followed by the suffix."""
        return self.period * reps + self.suffix


def canonicalize(seq: SymbolSeq) -> SymbolSeq:
    # construction already canonicalizes; kept as an explicit entry point
    return SymbolSeq(seq.period, seq.suffix, seq.J)


def shift(seq: SymbolSeq) -> SymbolSeq:
    """Drop x_0."""
    if seq.suffix:
        return SymbolSeq(seq.period, seq.suffix[:-1], seq.J)
    q = seq.period
    return SymbolSeq(q[-1:] + q[:-1], (), seq.J)


def star(seq: SymbolSeq, j: int = 1) -> SymbolSeq:
    """Add j to x_0 modulo J + 1."""
    body = seq.suffix if seq.suffix else seq.period
    head = seq.suffix[:-1] if seq.suffix else seq.period[:-1]
    new_last = (body[-1] + j) % (seq.J + 1)
    return SymbolSeq(seq.period, head + (new_last,), seq.J)


def star_word(word: Word, j: int, J: int) -> Word:
    return word[:-1] + ((word[-1] + j) % (J + 1),)


def agreement(a: SymbolSeq, b: SymbolSeq) -> int | None:
    """Number of leading positions 0, -1, ... on which a and b agree; None if equal."""
    if a == b:
        return None
    bound = len(a.suffix) + len(b.suffix) + len(a.period) * len(b.period) // gcd(
        len(a.period), len(b.period)
    )
    for i, (x, y) in enumerate(zip(a.read(), b.read())):
        if x != y:
            return i
        if i > bound:  # pragma: no cover - canonical forms differ within bound
            raise AssertionError("canonical forms disagree but sequences match")
    raise AssertionError("unreachable")


def rho(a: SymbolSeq, b: SymbolSeq) -> Fraction:
    if a.J != b.J:
        raise ValueError("points over different alphabets")
    l = agreement(a, b)
    return Fraction(0) if l is None else Fraction(1, 2**l)


def occurs(pattern: Word, word: Word) -> bool:
    n = len(pattern)
    return any(word[i : i + n] == pattern for i in range(len(word) - n + 1))
