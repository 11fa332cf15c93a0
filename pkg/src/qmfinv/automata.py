"""Closed subsets of sequence space given by finite automata read from x_0 leftwards.

A :class:`SymbolicSet` is a nondeterministic automaton whose states are small
ints.  Reading a point right to left (x_0 first) the automaton keeps the set
of states consistent with the symbols seen so far.  The represented closed set
is the set of points admitting an infinite run; its initial words are the
words that label a finite run ending in a state with an infinite continuation
("alive" states).  Every set built here is therefore closed, and the same
machinery gives closures of non-closed sets such as exit sets.
"""
from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Callable, Hashable, Iterable

from .symbolic import SymbolSeq, Word

Nodes = frozenset


class EmptySetError(ValueError):
    """Raised when a distance to an empty set is requested."""


class SymbolicSet:
    def __init__(self, J: int, start: Iterable[int], pred: list[tuple[frozenset, ...]], prune: bool = True):
        self.J = J
        self.pred = pred
        self.alive = _alive(pred) if prune else frozenset(range(len(pred)))
        self.start = frozenset(n for n in start if n in self.alive)

    # construction -----------------------------------------------------

    @classmethod
    def build(
        cls,
        J: int,
        start: Iterable[Hashable],
        successors: Callable[[Hashable, int], Iterable[Hashable]],
        prune: bool = True,
    ) -> "SymbolicSet":
        """Enumerate the states reachable from ``start``; ``successors(node, a)``
        gives the states reached after reading symbol ``a`` further to the left."""
        index: dict[Hashable, int] = {}
        order: list[Hashable] = []

        def idx(node):
            if node not in index:
                index[node] = len(order)
                order.append(node)
            return index[node]

        start_ids = [idx(n) for n in start]
        pred: list[tuple[frozenset, ...]] = []
        i = 0
        while i < len(order):
            node = order[i]
            pred.append(tuple(frozenset(idx(m) for m in successors(node, a)) for a in range(J + 1)))
            i += 1
        return cls(J, start_ids, pred, prune)

    @classmethod
    def everything(cls, J: int) -> "SymbolicSet":
        return cls(J, [0], [tuple(frozenset([0]) for _ in range(J + 1))])

    @classmethod
    def nothing(cls, J: int) -> "SymbolicSet":
        return cls(J, [], [])

    # reading -----------------------------------------------------------

    def step(self, nodes: frozenset, a: int) -> frozenset:
        out = set()
        for n in nodes:
            out |= self.pred[n][a]
        return frozenset(out & self.alive)

    def is_empty(self) -> bool:
        return not self.start

    def read_word(self, word: Word) -> frozenset:
        """State set after reading ``word`` (given left to right) from its right end."""
        nodes = self.start
        for a in reversed(word):
            if not nodes:
                break
            nodes = self.step(nodes, a)
        return nodes

    def has_initial_word(self, word: Word) -> bool:
        """True iff the cylinder C(word) meets the set."""
        return bool(self.read_word(word))

    def matched_length(self, seq: SymbolSeq) -> int | None:
        """Length of the longest initial word of ``seq`` that is an initial word of
        the set, or None when every initial word is (``seq`` lies in the set)."""
        if seq.J != self.J:
            raise ValueError("alphabet mismatch")
        nodes = self.start
        if not nodes:
            raise EmptySetError("set is empty")
        n = 0
        for a in reversed(seq.suffix):
            nodes = self.step(nodes, a)
            if not nodes:
                return n
            n += 1
        seen = set()
        rev = tuple(reversed(seq.period))
        while nodes not in seen:
            seen.add(nodes)
            for a in rev:
                nodes = self.step(nodes, a)
                if not nodes:
                    return n
                n += 1
        return None

    def distance(self, seq: SymbolSeq) -> Fraction:
        """Exact rho-distance from ``seq`` to the set."""
        l = self.matched_length(seq)
        return Fraction(0) if l is None else Fraction(1, 2**l)

    def __contains__(self, seq: SymbolSeq) -> bool:
        return self.matched_length(seq) is None

    def words(self, n: int) -> list[Word]:
        """All initial words of length n, sorted."""
        layer = {(): self.start} if self.start else {}
        for _ in range(n):
            nxt = {}
            for w, nodes in layer.items():
                for a in range(self.J + 1):
                    m = self.step(nodes, a)
                    if m:
                        nxt[(a,) + w] = m
            layer = nxt
        return sorted(layer)

    def first_empty_depth(self, limit: int = 4096) -> int | None:
        """Smallest n with no initial word of length n (None if none up to ``limit``).

        Used on automata whose state sets are not alive-pruned jointly, such as
        language intersections."""
        layer = {self.start} if self.start else set()
        for n in range(limit + 1):
            if not layer:
                return n
            nxt = set()
            for nodes in layer:
                for a in range(self.J + 1):
                    m = self.step(nodes, a)
                    if m:
                        nxt.add(m)
            layer = nxt
        return None

    def representative(self, word: Word = ()) -> SymbolSeq | None:
        """An eventually periodic point of the set lying in C(word), or None."""
        nodes = self.read_word(word)
        if not nodes:
            return None
        node = min(nodes)
        path: list[int] = []
        visited: dict[int, int] = {}
        while node not in visited:
            visited[node] = len(path)
            for a in range(self.J + 1):
                nxt = [m for m in self.pred[node][a] if m in self.alive]
                if nxt:
                    path.append(a)
                    node = min(nxt)
                    break
            else:  # pragma: no cover - alive nodes always continue
                raise AssertionError("dead state on an alive run")
        c = visited[node]
        prefix = tuple(reversed(word)) + tuple(path[:c])
        return SymbolSeq.from_read_order(prefix, path[c:], self.J)

    def has_constant_tail(self, symbol: int) -> bool:
        """Whether some point of the set ends (to the left) in the constant ``symbol``."""
        sub = [tuple(p[a] if a == symbol else frozenset() for a in range(self.J + 1)) for p in self.pred]
        alive_sub = _alive(sub)
        # reachable (any symbols) from start into a constant-symbol cycle
        seen = set(self.start)
        queue = deque(self.start)
        while queue:
            n = queue.popleft()
            if n in alive_sub:
                return True
            for a in range(self.J + 1):
                for m in self.pred[n][a]:
                    if m in self.alive and m not in seen:
                        seen.add(m)
                        queue.append(m)
        return False

    # set algebra -------------------------------------------------------

    def star(self, j: int) -> "SymbolicSet":
        """Image under x_0 -> x_0 + j (mod J+1)."""
        J, base = self.J, self

        def succ(node, a):
            if node == "S":
                b = (a - j) % (J + 1)
                return [("n", m) for s in base.start for m in base.pred[s][b] if m in base.alive]
            return [("n", m) for m in base.pred[node[1]][a] if m in base.alive]

        return SymbolicSet.build(J, ["S"], succ)

    def preimage(self) -> "SymbolicSet":
        """Theta^{-1}: points whose shift lies in the set."""
        J, base = self.J, self

        def succ(node, a):
            if node == "S":
                return [("n", s) for s in base.start]
            return [("n", m) for m in base.pred[node[1]][a] if m in base.alive]

        return SymbolicSet.build(J, ["S"], succ)

    def intersect(self, other: "SymbolicSet") -> "SymbolicSet":
        _check_same(self, other)
        a_, b_ = self, other

        def succ(node, a):
            x, y = node
            return [
                (m, n)
                for m in a_.pred[x][a]
                if m in a_.alive
                for n in b_.pred[y][a]
                if n in b_.alive
            ]

        return SymbolicSet.build(self.J, [(x, y) for x in a_.start for y in b_.start], succ)

    def union(self, other: "SymbolicSet") -> "SymbolicSet":
        _check_same(self, other)
        sets = (self, other)

        def succ(node, a):
            k, x = node
            return [(k, m) for m in sets[k].pred[x][a] if m in sets[k].alive]

        start = [(0, x) for x in self.start] + [(1, y) for y in other.start]
        return SymbolicSet.build(self.J, start, succ)

    def language_meets(self, other: "SymbolicSet") -> "SymbolicSet":
        """Automaton for the words that are initial words of both sets.

        Unlike :meth:`intersect` the result is not re-pruned jointly, so its
        :meth:`first_empty_depth` is the first length at which no initial word
        is shared."""
        _check_same(self, other)
        a_, b_ = self, other

        def succ(node, a):
            x, y = node
            return [(m, n) for m in a_.pred[x][a] if m in a_.alive for n in b_.pred[y][a] if n in b_.alive]

        # no joint pruning: each side is already alive on its own
        return SymbolicSet.build(self.J, [(x, y) for x in a_.start for y in b_.start], succ, prune=False)

    def same_points(self, other: "SymbolicSet", depth: int = 12) -> bool:
        """Equality of initial-word languages up to ``depth``."""
        return all(self.words(n) == other.words(n) for n in range(1, depth + 1))

    def __repr__(self) -> str:
        return f"SymbolicSet(J={self.J}, states={len(self.pred)}, empty={self.is_empty()})"


def _check_same(a: SymbolicSet, b: SymbolicSet) -> None:
    if a.J != b.J:
        raise ValueError("alphabet mismatch")


def _alive(pred: list[tuple[frozenset, ...]]) -> frozenset:
    """States with an infinite leftward run (greatest fixed point)."""
    n = len(pred)
    out_count = [0] * n
    back: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        succs = set()
        for s in pred[u]:
            succs |= s
        out_count[u] = len(succs)
        for v in succs:
            back[v].append(u)
    dead = deque(u for u in range(n) if out_count[u] == 0)
    removed = set(dead)
    while dead:
        v = dead.popleft()
        for u in back[v]:
            if u in removed:
                continue
            out_count[u] -= 1
            if out_count[u] == 0:
                removed.add(u)
                dead.append(u)
    return frozenset(range(n)) - removed
