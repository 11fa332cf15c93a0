"""Subshifts of finite type, exit and barrier sets, and the symbolic invariance conditions."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .automata import SymbolicSet
from .symbolic import SymbolSeq, Word, format_word, occurs, parse_word, shift, star


def reduce_words(words: Iterable[Word]) -> frozenset:
    """Drop every word that contains another word of the collection."""
    kept: list[Word] = []
    for w in sorted(set(words), key=lambda w: (len(w), w)):
        if not any(occurs(v, w) for v in kept):
            kept.append(w)
    return frozenset(kept)


class _PatternMatcher:
    """Aho-Corasick automaton over the forbidden words, read left to right.

    A state is the longest suffix of the text read so far that is a prefix of
    some forbidden word; it is unsafe when a forbidden word ends there.
    """

    def __init__(self, words: frozenset, J: int):
        goto: dict[tuple[int, int], int] = {}
        labels: list[Word] = [()]
        terminal = [False]
        for w in sorted(words):
            node = 0
            for a in w:
                nxt = goto.get((node, a))
                if nxt is None:
                    nxt = len(labels)
                    goto[(node, a)] = nxt
                    labels.append(labels[node] + (a,))
                    terminal.append(False)
                node = nxt
            terminal[node] = True
        n = len(labels)
        fail = [0] * n
        delta = [[0] * (J + 1) for _ in range(n)]
        queue = deque()
        for a in range(J + 1):
            nxt = goto.get((0, a))
            if nxt is not None:
                delta[0][a] = nxt
                queue.append(nxt)
        while queue:
            u = queue.popleft()
            terminal[u] = terminal[u] or terminal[fail[u]]
            for a in range(J + 1):
                v = goto.get((u, a))
                if v is not None:
                    fail[v] = delta[fail[u]][a]
                    delta[u][a] = v
                    queue.append(v)
                else:
                    delta[u][a] = delta[fail[u]][a]
        self.labels = labels
        self.delta = delta
        self.unsafe = terminal
        self.safe = [u for u in range(n) if not terminal[u]]
        # into[(v, a)]: safe states u with u --a--> v
        self.into: dict[tuple[int, int], list[int]] = {}
        for u in self.safe:
            for a in range(J + 1):
                self.into.setdefault((delta[u][a], a), []).append(u)


class SftSubshift:
    """K = X_F for a finite set F of forbidden words over {0, ..., J}.

    The forbidden set is reduced on construction.  ``automaton`` represents K;
    its states are pattern-matcher states, so its size is linear in the total
    length of F rather than exponential in the longest word.
    """

    def __init__(self, J: int, forbidden: Iterable):
        self.J = int(J)
        words = [parse_word(w) for w in forbidden]
        if not words:
            raise ValueError("forbidden set must be nonempty")
        for w in words:
            if not w or any(not 0 <= s <= self.J for s in w):
                raise ValueError(f"bad forbidden word {format_word(w)!r} for J={self.J}")
        self.forbidden = reduce_words(words)
        self._pm = _PatternMatcher(self.forbidden, self.J)
        pm = self._pm
        self.automaton = SymbolicSet.build(self.J, pm.safe, lambda v, a: pm.into.get((v, a), ()))
        if self.automaton.is_empty():
            raise ValueError("the forbidden words leave no infinite sequence")
        self._exit = None

    def __eq__(self, other):
        return isinstance(other, SftSubshift) and (self.J, self.forbidden) == (other.J, other.forbidden)

    def __hash__(self):
        return hash((self.J, self.forbidden))

    def __repr__(self) -> str:
        ws = ",".join(sorted(format_word(w) for w in self.forbidden))
        return f"SftSubshift(J={self.J}, forbidden={{{ws}}})"

    @property
    def max_length(self) -> int:
        return max(len(w) for w in self.forbidden)

    def is_allowed(self, word: Word) -> bool:
        return not any(occurs(f, word) for f in self.forbidden)

    def contains(self, seq: SymbolSeq) -> bool:
        """Direct window scan over suffix, period and junctions."""
        _same_j(self.J, seq)
        reps = -(-self.max_length // len(seq.period)) + 1
        return self.is_allowed(seq.expanded(reps))

    __contains__ = contains

    def shift_is_onto(self) -> bool:
        """Whether Theta(K) = K, i.e. every point of K extends by a symbol on the right."""
        pm = self._pm
        # start states were indexed first, in the order of pm.safe
        return all(
            any(not pm.unsafe[pm.delta[v][a]] for a in range(self.J + 1))
            for i, v in enumerate(pm.safe)
            if i in self.automaton.alive
        )

    def exit_closure(self) -> SymbolicSet:
        """Automaton for the closure of the exit set K_e^c."""
        if self._exit is None:
            pm = self._pm

            def succ(node, a):
                if node == "exit":
                    return [u for u in pm.safe if pm.unsafe[pm.delta[u][a]]]
                return pm.into.get((node, a), ())

            self._exit = SymbolicSet.build(self.J, ["exit"], succ)
        return self._exit


def contains(K: SftSubshift, seq: SymbolSeq) -> bool:
    return K.contains(seq)


class ExitSet:
    """Handle on K_e^c = Theta^{-1}(K) minus K."""

    def __init__(self, K: SftSubshift):
        self.K = K
        self.closure = K.exit_closure()

    def __contains__(self, seq: SymbolSeq) -> bool:
        return not self.K.contains(seq) and self.K.contains(shift(seq))

    def distance(self, seq: SymbolSeq) -> Fraction:
        return self.closure.distance(seq)

    def is_empty(self) -> bool:
        return self.closure.is_empty()

    def is_closed(self) -> bool:
        # closure lies in Theta^{-1}(K); if it also misses K it equals the exit set
        return self.K.automaton.intersect(self.closure).is_empty()

    def points(self, depth: int) -> list[SymbolSeq]:
        """One representative of the closure in each depth-``depth`` cylinder it meets."""
        return [self.closure.representative(w) for w in self.closure.words(depth)]


def exit_set(K: SftSubshift) -> ExitSet:
    return ExitSet(K)


class BarrierSet:
    """K_b = points of K all of whose last-symbol variants leave K."""

    def __init__(self, K: SftSubshift):
        self.K = K
        Z = K.exit_closure()
        aut = K.automaton
        for j in range(1, K.J + 1):
            aut = aut.intersect(Z.star(-j))
        self.closure = aut

    def __contains__(self, seq: SymbolSeq) -> bool:
        K = self.K
        return K.contains(seq) and all(not K.contains(star(seq, j)) for j in range(1, K.J + 1))

    def distance(self, seq: SymbolSeq) -> Fraction:
        return self.closure.distance(seq)

    def is_empty(self) -> bool:
        return self.closure.is_empty()


def barrier_set(K: SftSubshift) -> BarrierSet:
    return BarrierSet(K)


class CylinderUnion:
    """A finite union of cylinders C(w); clopen."""

    def __init__(self, words: Iterable, J: int):
        self.J = int(J)
        self.words = frozenset(parse_word(w) for w in words)
        for w in self.words:
            if not w or any(not 0 <= s <= self.J for s in w):
                raise ValueError(f"bad cylinder word {w!r}")
        self._aut = None

    def __repr__(self) -> str:
        return f"CylinderUnion({sorted(format_word(w) for w in self.words)}, J={self.J})"

    def __contains__(self, seq: SymbolSeq) -> bool:
        _same_j(self.J, seq)
        return any(seq.last(len(w)) == w for w in self.words)

    @property
    def depth(self) -> int:
        return max((len(w) for w in self.words), default=1)

    def expand(self, n: int) -> frozenset:
        """The same set written with words of length exactly n (n >= depth)."""
        out = set()
        for w in self.words:
            for head in itertools.product(range(self.J + 1), repeat=n - len(w)):
                out.add(tuple(head) + w)
        return frozenset(out)

    def complement(self) -> "CylinderUnion":
        n = self.depth
        mine = self.expand(n)
        allw = itertools.product(range(self.J + 1), repeat=n)
        return CylinderUnion([w for w in allw if w not in mine], self.J)

    def preimage(self) -> "CylinderUnion":
        """Theta^{-1} of the set."""
        return CylinderUnion([w + (a,) for w in self.words for a in range(self.J + 1)], self.J)

    def intersect(self, other: "CylinderUnion") -> "CylinderUnion":
        n = max(self.depth, other.depth)
        return CylinderUnion(self.expand(n) & other.expand(n), self.J)

    def is_empty(self) -> bool:
        return not self.words

    @property
    def automaton(self) -> SymbolicSet:
        if self._aut is None:
            words = sorted(self.words)

            def succ(node, a):
                if node == "free":
                    return ["free"]
                w, i = node
                if w[len(w) - 1 - i] != a:
                    return []
                return ["free"] if i + 1 == len(w) else [(w, i + 1)]

            self._aut = SymbolicSet.build(self.J, [(w, 0) for w in words], succ)
        return self._aut


def as_symbolic(S) -> SymbolicSet:
    if isinstance(S, SymbolicSet):
        return S
    if isinstance(S, SftSubshift):
        return S.automaton
    if isinstance(S, (ExitSet, BarrierSet)):
        return S.closure
    if isinstance(S, CylinderUnion):
        return S.automaton
    raise TypeError(f"cannot view {type(S).__name__} as a symbolic set")


def rho_to_set(seq: SymbolSeq, S) -> Fraction:
    """Exact infimum of rho(seq, s) over s in S (distance to the closure of S)."""
    return as_symbolic(S).distance(seq)


@dataclass
class ConditionResult:
    holds: bool
    witness: SymbolSeq | None = None

    def __bool__(self) -> bool:
        return self.holds


def star_intersection(Z: SymbolicSet) -> SymbolicSet:
    """Automaton for the intersection over j = 0..J of the star images of Z."""
    out = Z
    for j in range(1, Z.J + 1):
        out = out.intersect(Z.star(j))
    return out


def condition_thm_1_2(K: SftSubshift) -> ConditionResult:
    """Whether the star images of the closed exit set have empty common part."""
    inter = star_intersection(K.exit_closure())
    if inter.is_empty():
        return ConditionResult(True)
    return ConditionResult(False, inter.representative())


class GeneratorFamily:
    """An infinite forbidden-word family given by base words plus generations n = 1, 2, ...

    Truncation at L keeps the base words and generations 1..L, so raising L
    only ever adds words.
    """

    def __init__(self, name: str, J: int, base: Sequence, generation: Callable[[int], list], member_depth=None):
        self.name = name
        self.J = J
        self.base = tuple(parse_word(w) for w in base)
        self.generation = generation
        self._member_depth = member_depth

    def __repr__(self) -> str:
        return f"GeneratorFamily({self.name!r}, J={self.J})"

    def words(self, L: int) -> frozenset:
        out = set(self.base)
        for n in range(1, L + 1):
            out.update(parse_word(w) for w in self.generation(n))
        return frozenset(out)

    def truncate(self, L: int) -> SftSubshift:
        return SftSubshift(self.J, self.words(L))

    def contains(self, seq: SymbolSeq, depth: int | None = None) -> bool:
        """Membership in the untruncated subshift.

        ``depth`` defaults to a generation beyond which no word can occur in
        ``seq`` (family-specific bound)."""
        if depth is None:
            if self._member_depth is None:
                raise ValueError("no exact membership bound known for this family; pass depth")
            depth = self._member_depth(seq)
        return self.truncate(depth).contains(seq)


def _example_3_1_generation(n: int) -> list[Word]:
    return [(0, 0) + (1, 0) * n + (0,), (1, 1) + (0, 1) * n + (1,)]


def example_3_1() -> GeneratorFamily:
    """The non-finite-type subshift whose closed exit set still avoids its barrier set.

    Generation n forbids 0 0 (1 0)^n 0 and 1 1 (0 1)^n 1 on top of 0000 and 1111.
    """
    # an occurrence of generation n needs an alternating run of length 2n bounded by
    # a doubled symbol, which an eventually periodic point only has for small n
    return GeneratorFamily(
        "example_3_1",
        1,
        ["0000", "1111"],
        _example_3_1_generation,
        member_depth=lambda s: len(s.suffix) + 2 * len(s.period) + 4,
    )


GENERATORS = {"example_3_1": example_3_1}


@dataclass
class Prop22Report:
    finite_type: bool
    exit_set_closed: bool
    disjoint_from_exit_closure: bool
    witness: SymbolSeq | None = None
    witness_distance: Fraction | None = None
    truncation: int | None = None

    @property
    def all_true(self) -> bool:
        return self.finite_type and self.exit_set_closed and self.disjoint_from_exit_closure


def _small_points(J: int, max_period: int, max_suffix: int):
    seen = set()
    for p in range(1, max_period + 1):
        for q in itertools.product(range(J + 1), repeat=p):
            for s in range(max_suffix + 1):
                for suf in itertools.product(range(J + 1), repeat=s):
                    pt = SymbolSeq(q, suf, J)
                    if pt not in seen:
                        seen.add(pt)
                        yield pt


def find_exit_witness(family: GeneratorFamily, L: int, max_period: int = 3, max_suffix: int = 4):
    """Point of the untruncated subshift nearest to the exit set of its L-truncation."""
    ex = ExitSet(family.truncate(L))
    best = None
    for pt in _small_points(family.J, max_period, max_suffix):
        if not family.contains(pt):
            continue
        d = ex.distance(pt)
        key = (d, len(pt.period) + len(pt.suffix), str(pt))
        if best is None or key < best[0]:
            best = (key, pt)
    if best is None:
        return None, None
    return best[1], best[0][0]


def check_prop_2_2(K, L: int | None = None) -> Prop22Report:
    """Finite type, closed exit set, and K disjoint from the exit-set closure.

    For an :class:`SftSubshift` the last two are decided on automata (and the
    first holds by construction).  For a :class:`GeneratorFamily` truncated at
    ``L`` the flags are reported false when a point of the full subshift lies
    within 2^-L of the truncation's exit set; that point is returned as the
    witness together with its exact distance.
    """
    if isinstance(K, SftSubshift):
        disjoint = K.automaton.intersect(K.exit_closure()).is_empty()
        return Prop22Report(True, disjoint, disjoint)
    if isinstance(K, GeneratorFamily):
        if L is None:
            raise ValueError("a generator family needs a truncation L")
        witness, d = find_exit_witness(K, L)
        near = witness is not None and d <= Fraction(1, 2**L)
        return Prop22Report(not near, not near, not near, witness, d, L)
    raise TypeError(f"unsupported subshift description {type(K).__name__}")


def _same_j(J: int, seq: SymbolSeq) -> None:
    if seq.J != J:
        raise ValueError(f"point over J={seq.J}, expected J={J}")
