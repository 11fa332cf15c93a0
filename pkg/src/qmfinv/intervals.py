"""Exact rational geometry on [0,1]: tau, binary expansions, the doubling and star maps,
finite interval unions with open/closed endpoints, and tau-images of symbolic sets.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .automata import EmptySetError, SymbolicSet
from .subshift import SftSubshift
from .symbolic import SymbolSeq, format_word

HALF = Fraction(1, 2)
ZERO = Fraction(0)
ONE = Fraction(1)


def as_rational(x) -> Fraction:
    """Fraction from int, Fraction, "p/q" or decimal text; floats go through their repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def tau(seq: SymbolSeq) -> Fraction:
    """Binary value of the point, x_0 being the leading digit."""
    if seq.J != 1:
        raise ValueError("tau is defined for binary sequences only")
    s, P = len(seq.suffix), len(seq.period)
    head = int("".join(map(str, reversed(seq.suffix))) or "0", 2)
    block = int("".join(map(str, reversed(seq.period))), 2)
    return Fraction(head * (2**P - 1) + block, (2**P - 1) << s)


def binary_reps(x) -> list[SymbolSeq]:
    """All binary sequences s with tau(s) = x; two for binary rationals in (0,1)."""
    x = as_rational(x)
    if not ZERO <= x <= ONE:
        raise ValueError(f"{x} outside [0,1]")
    if x == 0:
        return [SymbolSeq((0,))]
    if x == 1:
        return [SymbolSeq((1,))]
    q = x.denominator
    if q & (q - 1) == 0:
        n = q.bit_length() - 1
        digits = [(x.numerator >> (n - 1 - i)) & 1 for i in range(n)]
        return [
            SymbolSeq.from_read_order(digits, (0,), 1),
            SymbolSeq.from_read_order(digits[:-1] + [0], (1,), 1),
        ]
    r = x.numerator
    seen: dict[int, int] = {}
    digits = []
    while r not in seen:
        seen[r] = len(digits)
        r *= 2
        digits.append(1 if r >= q else 0)
        if r >= q:
            r -= q
    c = seen[r]
    return [SymbolSeq.from_read_order(digits[:c], digits[c:], 1)]


def is_binary_rational(x) -> bool:
    q = as_rational(x).denominator
    return q & (q - 1) == 0


def doubling(x) -> Fraction:
    """theta(x) = 2x mod 1 on [0,1)."""
    x = as_rational(x)
    if not ZERO <= x < ONE:
        raise ValueError(f"doubling map is defined on [0,1); got {x}")
    return 2 * x if x < HALF else 2 * x - 1


def star_interval(x) -> Fraction:
    """x + 1/2 on [0,1/2], x - 1/2 on (1/2,1]."""
    x = as_rational(x)
    if not ZERO <= x <= ONE:
        raise ValueError(f"{x} outside [0,1]")
    return x + HALF if x <= HALF else x - HALF


# ---------------------------------------------------------------------------
# finite unions of intervals


@dataclass(frozen=True, order=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        if self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed)):
            raise ValueError(f"empty interval {self}")

    def __contains__(self, x) -> bool:
        x = as_rational(x)
        left = x > self.lo or (self.lo_closed and x == self.lo)
        right = x < self.hi or (self.hi_closed and x == self.hi)
        return left and right

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def affine(self, scale: Fraction, offset: Fraction) -> "Interval":
        """Image under x -> scale*x + offset, scale > 0."""
        return Interval(self.lo * scale + offset, self.hi * scale + offset, self.lo_closed, self.hi_closed)

    def __str__(self) -> str:
        if self.is_point:
            return "{" + str(self.lo) + "}"
        return f"{'[' if self.lo_closed else '('}{self.lo},{self.hi}{']' if self.hi_closed else ')'}"


_FLAGS = {
    "closed": (True, True),
    "closed-closed": (True, True),
    "open": (False, False),
    "open-open": (False, False),
    "closed-open": (True, False),
    "open-closed": (False, True),
}


class IntervalSet:
    """Finite union of intervals inside [0,1], stored sorted, disjoint and maximal."""

    kind = "intervals"

    def __init__(self, intervals: Iterable[Interval] = ()):
        raw = [iv for iv in intervals]
        for iv in raw:
            if iv.lo < 0 or iv.hi > 1:
                raise ValueError(f"interval {iv} not inside [0,1]")
        self.intervals: tuple[Interval, ...] = _normalize(raw)

    # constructors
    @classmethod
    def points(cls, xs: Iterable) -> "IntervalSet":
        return cls(Interval(x, x) for x in map(as_rational, xs))

    @classmethod
    def from_spec(cls, triples: Iterable[Sequence]) -> "IntervalSet":
        """From (lo, hi, flags) triples, flags like "closed-open"."""
        out = []
        for t in triples:
            flags = _FLAGS[t[2] if len(t) > 2 else "closed"]
            out.append(Interval(as_rational(t[0]), as_rational(t[1]), *flags))
        return cls(out)

    def __repr__(self) -> str:
        return "IntervalSet(" + " u ".join(str(iv) for iv in self.intervals) + ")"

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    @property
    def is_points(self) -> bool:
        return all(iv.is_point for iv in self.intervals)

    def point_values(self) -> list[Fraction]:
        if not self.is_points:
            raise ValueError("set is not a finite point set")
        return [iv.lo for iv in self.intervals]

    def is_empty(self) -> bool:
        return not self.intervals

    def __contains__(self, x) -> bool:
        return any(x in iv for iv in self.intervals)

    def contains(self, x) -> bool:
        return x in self

    def endpoints(self) -> list[Fraction]:
        return sorted({e for iv in self.intervals for e in (iv.lo, iv.hi)})

    # boolean algebra on [0,1]
    def _combine(self, other: "IntervalSet", op) -> "IntervalSet":
        breaks = sorted({ZERO, ONE, *self.endpoints(), *other.endpoints()})
        return _from_predicate(breaks, lambda x: op(x in self, x in other))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return self._combine(other, lambda a, b: a or b)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        return self._combine(other, lambda a, b: a and b)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return self._combine(other, lambda a, b: a and not b)

    def complement(self) -> "IntervalSet":
        return FULL.difference(self)

    __or__, __and__, __sub__ = union, intersect, difference

    def issubset(self, other: "IntervalSet") -> bool:
        return self.difference(other).is_empty()

    def closure(self) -> "IntervalSet":
        return IntervalSet(Interval(iv.lo, iv.hi) for iv in self.intervals)

    def interior(self) -> "IntervalSet":
        """Interior relative to [0,1]."""
        out = []
        for iv in self.intervals:
            if iv.is_point:
                continue
            out.append(Interval(iv.lo, iv.hi, iv.lo == 0 and iv.lo_closed, iv.hi == 1 and iv.hi_closed))
        return IntervalSet(out)

    def is_closed(self) -> bool:
        return self.closure() == self

    # maps
    def affine(self, scale, offset) -> "IntervalSet":
        return IntervalSet(iv.affine(as_rational(scale), as_rational(offset)) for iv in self.intervals)

    def halves(self) -> "IntervalSet":
        """{x/2 + j/2 : x in E, j in {0,1}}."""
        return self.affine(HALF, 0).union(self.affine(HALF, HALF))

    def star(self) -> "IntervalSet":
        lower = self.intersect(IntervalSet([Interval(0, HALF)]))
        upper = self.intersect(IntervalSet([Interval(HALF, 1, False, True)]))
        return lower.affine(1, HALF).union(upper.affine(1, -HALF))

    def doubling_image(self) -> "IntervalSet":
        lower = self.intersect(IntervalSet([Interval(0, HALF, True, False)]))
        upper = self.intersect(IntervalSet([Interval(HALF, 1, True, False)]))
        return lower.affine(2, 0).union(upper.affine(2, -1))

    def expand(self, r) -> "IntervalSet":
        """Closed r-neighbourhood, clipped to [0,1]."""
        r = as_rational(r)
        return IntervalSet(Interval(max(ZERO, iv.lo - r), min(ONE, iv.hi + r)) for iv in self.intervals)

    # metric
    def dist(self, x) -> Fraction:
        if not self.intervals:
            raise EmptySetError("distance to the empty set")
        x = as_rational(x)
        return min(_gap(x, x, iv.lo, iv.hi) for iv in self.intervals)

    def dist_bounds(self, x, D: int = 64) -> tuple[Fraction, Fraction]:
        d = self.dist(x)
        return d, d

    def has_binary_rationals(self) -> bool:
        return any(not iv.is_point or is_binary_rational(iv.lo) for iv in self.intervals)

    def cover(self, r) -> "IntervalSet":
        return self.closure().expand(r)

    def cells(self, depth: int = 0) -> list[tuple[Fraction, Fraction]]:
        return [(iv.lo, iv.hi) for iv in self.closure().intervals]


def _gap(a_lo, a_hi, b_lo, b_hi) -> Fraction:
    if a_hi < b_lo:
        return b_lo - a_hi
    if b_hi < a_lo:
        return a_lo - b_hi
    return ZERO


def _from_predicate(breaks: list[Fraction], inside) -> IntervalSet:
    pieces = []  # (lo, hi, lo_closed, hi_closed, member)
    for i, b in enumerate(breaks):
        pieces.append((b, b, True, True, inside(b)))
        if i + 1 < len(breaks):
            c = breaks[i + 1]
            pieces.append((b, c, False, False, inside((b + c) / 2)))
    out = []
    run = None
    for lo, hi, lc, hc, member in pieces:
        if member:
            run = [lo, lc, hi, hc] if run is None else [run[0], run[1], hi, hc]
        elif run is not None:
            out.append(Interval(run[0], run[2], run[1], run[3]))
            run = None
    if run is not None:
        out.append(Interval(run[0], run[2], run[1], run[3]))
    s = IntervalSet.__new__(IntervalSet)
    s.intervals = tuple(out)
    return s


def _normalize(raw: list[Interval]) -> tuple[Interval, ...]:
    if not raw:
        return ()
    breaks = sorted({ZERO, ONE, *(e for iv in raw for e in (iv.lo, iv.hi))})
    return _from_predicate(breaks, lambda x: any(x in iv for iv in raw)).intervals


FULL = IntervalSet([Interval(0, 1)])
EMPTY = IntervalSet()


def Points(xs: Iterable) -> IntervalSet:
    return IntervalSet.points(xs)


def Intervals(triples: Iterable[Sequence]) -> IntervalSet:
    return IntervalSet.from_spec(triples)


# ---------------------------------------------------------------------------
# tau-images of closed symbolic sets


def _cyl_interval(a: Fraction, n: int) -> tuple[Fraction, Fraction]:
    return a, a + Fraction(1, 2**n)


class SymbolicBacked:
    """tau(A) for a closed binary symbolic set A; a compact subset of [0,1]."""

    kind = "sft"

    def __init__(self, aut: SymbolicSet, label: str = ""):
        if aut.J != 1:
            raise ValueError("tau-images need a binary alphabet")
        self.aut = aut
        self.label = label
        self._tails: dict = {}

    def __repr__(self) -> str:
        return f"SymbolicBacked({self.label or self.aut!r})"

    def is_empty(self) -> bool:
        return self.aut.is_empty()

    def __contains__(self, x) -> bool:
        return any(s in self.aut for s in binary_reps(x))

    def contains(self, x) -> bool:
        return x in self

    def has_binary_rationals(self) -> bool:
        return self.aut.has_constant_tail(0) or self.aut.has_constant_tail(1)

    def cylinders(self, n: int) -> list[tuple[Fraction, Fraction]]:
        """tau-intervals of the depth-n cylinders that meet the set."""
        layer = [(ZERO, self.aut.start)] if self.aut.start else []
        for i in range(n):
            w = Fraction(1, 2 ** (i + 1))
            nxt = []
            for a, nodes in layer:
                for b in (0, 1):
                    m = self.aut.step(nodes, b)
                    if m:
                        nxt.append((a + b * w, m))
            layer = nxt
        return sorted(_cyl_interval(a, n) for a, _ in layer)

    cells = cylinders

    def cover(self, r, depth: int | None = None) -> IntervalSet:
        """Closed set containing the set in its interior, within r + 2^-depth of it."""
        r = as_rational(r)
        if depth is None:
            depth = max(1, (r.denominator // max(1, r.numerator)).bit_length())
        return IntervalSet(
            Interval(max(ZERO, lo - r), min(ONE, hi + r)) for lo, hi in self.cylinders(depth)
        )

    def dist_bounds(self, x, D: int = 64) -> tuple[Fraction, Fraction]:
        """Certified (lower, upper) bounds on the distance from x, at most 2^-D apart.

        The upper bound is attained by an actual point of the set."""
        if self.aut.is_empty():
            raise EmptySetError("distance to the empty set")
        x = as_rational(x)
        if x in self:
            return ZERO, ZERO
        return _branch_and_bound([self], lambda hs: _gap(x, x, *hs[0]), D)

    def _tail(self, nodes: frozenset, largest: bool) -> Fraction:
        """tau of the smallest (or largest) point readable from a state set."""
        key = (nodes, largest)
        hit = self._tails.get(key)
        if hit is not None:
            return hit
        order = (1, 0) if largest else (0, 1)
        cur, seen, digits = nodes, {}, []
        while cur not in seen:
            seen[cur] = len(digits)
            for b in order:
                m = self.aut.step(cur, b)
                if m:
                    digits.append(b)
                    cur = m
                    break
        c = seen[cur]
        v = tau(SymbolSeq.from_read_order(digits[:c], digits[c:], 1))
        self._tails[key] = v
        return v

    def _hull(self, a: Fraction, n: int, nodes: frozenset) -> tuple[Fraction, Fraction]:
        w = Fraction(1, 2**n)
        return a + w * self._tail(nodes, False), a + w * self._tail(nodes, True)

    def dist(self, x, D: int = 64) -> Fraction:
        return self.dist_bounds(x, D)[1]

    def star(self) -> "SymbolicBacked":
        return SymbolicBacked(self.aut.star(1), f"star({self.label})")

    def issubset_cover(self, other: IntervalSet, max_depth: int = 40) -> bool:
        """Certificate that the set lies inside ``other`` (checked on cylinder intervals)."""
        for n in range(1, max_depth + 1):
            if all(IntervalSet([Interval(lo, hi)]).issubset(other) for lo, hi in self.cylinders(n)):
                return True
        return False


class SftBacked(SymbolicBacked):
    """tau(K) for a binary subshift of finite type K."""

    def __init__(self, K: SftSubshift):
        if K.J != 1:
            raise ValueError("SftBacked needs J = 1")
        super().__init__(K.automaton, repr(K))
        self.K = K

    def __repr__(self) -> str:
        return f"SftBacked({self.K!r})"


ClosedSet1D = Union[IntervalSet, SymbolicBacked]


def _branch_and_bound(sets: list["SymbolicBacked"], lower, D: int):
    """Minimize a distance over tuples of points, one from each set.

    A node is a tuple of equal-depth cylinders, one per set, each carrying the
    exact hull [min, max] of the set inside it.  ``lower`` maps hulls to a lower
    bound; hull endpoints are points of the sets, so the distance between them
    is attained and serves as the upper bound.  The search stops when the two
    bounds meet or are within 2^-D."""
    eps = Fraction(1, 2**D)

    def attained(hulls):
        return min(lower([(p, p) for p in pts]) for pts in itertools.product(*hulls))

    root = tuple((ZERO, s.aut.start) for s in sets)
    hulls = [s._hull(ZERO, 0, s.aut.start) for s in sets]
    best = attained(hulls)
    counter = itertools.count()
    heap = [(lower(hulls), 0, next(counter), root)]
    while heap:
        lo, negn, _, node = heapq.heappop(heap)
        if lo >= best:
            return best, best
        if best - lo <= eps:
            return lo, best
        n = -negn + 1
        w = Fraction(1, 2**n)
        options = []
        for s, (a, nodes) in zip(sets, node):
            opts = []
            for b in (0, 1):
                m = s.aut.step(nodes, b)
                if m:
                    opts.append((a + b * w, m))
            options.append(opts)
        for child in itertools.product(*options):
            hulls = [s._hull(a, n, m) for s, (a, m) in zip(sets, child)]
            clo = lower(hulls)
            if clo >= best:
                continue
            best = min(best, attained(hulls))
            if clo < best:
                heapq.heappush(heap, (clo, -n, next(counter), child))
    return best, best


def set_distance_bounds(A: ClosedSet1D, B: ClosedSet1D, D: int = 64) -> tuple[Fraction, Fraction]:
    """Bounds on inf |a - b| over the closures of A and B."""
    if A.is_empty() or B.is_empty():
        raise EmptySetError("distance to the empty set")
    if isinstance(A, IntervalSet) and isinstance(B, IntervalSet):
        d = min(_gap(p.lo, p.hi, q.lo, q.hi) for p in A.intervals for q in B.intervals)
        return d, d
    if isinstance(A, SymbolicBacked) and isinstance(B, SymbolicBacked):
        return _branch_and_bound([A, B], lambda hs: _gap(*hs[0], *hs[1]), D)
    if isinstance(A, SymbolicBacked):
        A, B = B, A
    # A intervals, B symbolic: distance to the closest interval
    return min((B.dist_bounds(iv.lo, D) if iv.is_point else _iv_sym(iv, B, D)) for iv in A.intervals)


def _iv_sym(iv: Interval, B: SymbolicBacked, D: int):
    if any(lo <= iv.hi and iv.lo <= hi for lo, hi in B.cylinders(D)):
        return ZERO, Fraction(1, 2**D)
    lo_b = B.dist_bounds(iv.lo, D)
    hi_b = B.dist_bounds(iv.hi, D)
    return min(lo_b, hi_b)


def dist(E: ClosedSet1D, x) -> Fraction:
    """Distance from x to E (for tau-images: an attained upper bound within 2^-64)."""
    return E.dist(x)


# ---------------------------------------------------------------------------
# exit and barrier sets on the interval


def exit_and_barrier(B: ClosedSet1D) -> tuple[ClosedSet1D, ClosedSet1D]:
    """(B_e^c, B_b) with B_e^c = {x/2 + j/2 : x in B} minus B and B_b its star image.

    For tau-images of subshifts both are returned as closures, tau of the
    symbolic exit set closure and of its star image."""
    if isinstance(B, IntervalSet):
        ex = B.halves().difference(B)
        return ex, ex.star()
    if isinstance(B, SftBacked):
        Z = B.K.exit_closure()
        return SymbolicBacked(Z, "exit closure"), SymbolicBacked(Z.star(1), "barrier closure")
    raise TypeError(f"unsupported set {type(B).__name__}")


def closure(E: ClosedSet1D) -> ClosedSet1D:
    return E.closure() if isinstance(E, IntervalSet) else E


def is_theta_invariant(B: ClosedSet1D) -> bool:
    if isinstance(B, IntervalSet):
        return B.doubling_image() == B.intersect(IntervalSet([Interval(0, 1, True, False)])) and (
            ONE not in B
        )
    if isinstance(B, SftBacked):
        return B.K.shift_is_onto()
    raise TypeError(f"unsupported set {type(B).__name__}")


@dataclass
class SeparationReport:
    theta_invariant: bool
    exits_nonempty: bool
    no_binary_rationals: bool
    disjointness: bool
    delta: Fraction | None
    exit_set: ClosedSet1D
    barrier_set: ClosedSet1D


def check_lemma_4_3(B: ClosedSet1D, D: int = 64) -> SeparationReport:
    """Invariance, nonempty exits, absence of binary rationals, and the separation of
    the closed exit and barrier sets (with their distance when separated)."""
    ex, bar = exit_and_barrier(B)
    cex, cbar = closure(ex), closure(bar)
    no_br = not any(S.has_binary_rationals() for S in (closure(B), cex, cbar))
    if cex.is_empty() or cbar.is_empty():
        disjoint, delta = True, None
    else:
        lo, hi = set_distance_bounds(cex, cbar, D)
        disjoint = lo > 0
        if isinstance(B, SftBacked) and not disjoint:
            # tau is one-to-one away from binary rationals
            disjoint = no_br and B.K.exit_closure().intersect(B.K.exit_closure().star(1)).is_empty()
        delta = lo if disjoint else ZERO
    return SeparationReport(
        theta_invariant=is_theta_invariant(B),
        exits_nonempty=not ex.is_empty(),
        no_binary_rationals=no_br,
        disjointness=disjoint,
        delta=delta,
        exit_set=ex,
        barrier_set=bar,
    )


# ---------------------------------------------------------------------------
# plain-data form, as used in config files and JSON documents

_FLAG_NAMES = {v: k for k, v in _FLAGS.items() if "-" in k}


def set_to_dict(S: ClosedSet1D) -> dict:
    if isinstance(S, IntervalSet):
        if S.is_points:
            return {"points": [str(x) for x in S.point_values()]}
        return {
            "intervals": [
                [str(iv.lo), str(iv.hi), _FLAG_NAMES[(iv.lo_closed, iv.hi_closed)]] for iv in S.intervals
            ]
        }
    if isinstance(S, SftBacked):
        return {"sft": {"forbidden": sorted(format_word(w) for w in S.K.forbidden)}}
    raise TypeError(f"cannot serialize {type(S).__name__}")


def set_from_dict(d: dict) -> ClosedSet1D:
    """Inverse of :func:`set_to_dict`; also accepts the config-file spellings."""
    if "points" in d:
        return Points(d["points"])
    if "intervals" in d:
        return Intervals(d["intervals"])
    if "sft" in d:
        spec = d["sft"]
        if "generator" in spec:
            from .subshift import GENERATORS

            K = GENERATORS[spec["generator"]]().truncate(int(spec["truncation"]))
        else:
            K = SftSubshift(int(spec.get("J", 1)), spec["forbidden"])
        return SftBacked(K)
    raise ValueError(f"set description needs one of points/intervals/sft, got keys {sorted(d)}")
