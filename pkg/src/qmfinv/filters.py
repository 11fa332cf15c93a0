"""Transition functions on [0,1]: built-in filters, the two constructions of filters
with a prescribed invariant set, and the checks run against them.

Evaluation is dual-path.  A rational argument returns an exact ``Fraction``
whenever the value is known exactly (zero and one sets, tabulated cosines,
piecewise-linear pieces with rational knots) and a float otherwise; a float
argument always returns a float.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .intervals import (
    EMPTY,
    HALF,
    ONE,
    ZERO,
    ClosedSet1D,
    Interval,
    IntervalSet,
    SftBacked,
    as_rational,
    set_from_dict,
    set_to_dict,
    tau,
    check_lemma_4_3,
    closure,
    exit_and_barrier,
    set_distance_bounds,
    star_interval,
)


class ConstructionError(ValueError):
    """A constructor precondition failed; ``clause`` names the property that cannot be met."""

    def __init__(self, clause: str, message: str):
        super().__init__(f"{clause}: {message}")
        self.clause = clause


def _reduce(x):
    """Representative of x modulo 1 in [0,1], keeping 1 itself."""
    if 0 <= x <= 1:
        return x
    return x - math.floor(x)


class TransitionFn:
    """Base class; subclasses provide ``_exact`` and ``_float``."""

    name = "transition"

    def __call__(self, x):
        if isinstance(x, float):
            return self._float(_reduce(x))
        x = _reduce(as_rational(x))
        v = self._exact(x)
        return self._float_from_rational(x) if v is None else v

    def _exact(self, x: Fraction):
        return None

    def _float(self, x: float) -> float:
        raise NotImplementedError

    def _float_from_rational(self, x: Fraction) -> float:
        return self._float(float(x))

    def endpoints(self) -> list[Fraction]:
        """Region boundaries worth probing in residual checks."""
        return []

    def flat_radius(self) -> Fraction:
        """r with p = 1 on (-r, r) modulo 1 (0 if none is known)."""
        return ZERO

    def quad_constant(self) -> float | None:
        """c with p(y) >= 1 - c y^2 for |y| <= 1/2, if known."""
        return None

    def lower_bound_near_zero(self, h) -> float | None:
        """A lower bound for p on [-h, h], if one is known."""
        h = as_rational(h)
        if h < self.flat_radius():
            return 1.0
        c = self.quad_constant()
        if c is not None and h <= HALF:
            return max(0.0, 1 - c * float(h) ** 2)
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# built-in filters

# cos^2(pi y) at y with 12y integral and the value rational
_COS2 = {
    Fraction(0): Fraction(1),
    Fraction(1, 6): Fraction(3, 4),
    Fraction(1, 4): Fraction(1, 2),
    Fraction(1, 3): Fraction(1, 4),
    Fraction(1, 2): Fraction(0),
    Fraction(2, 3): Fraction(1, 4),
    Fraction(3, 4): Fraction(1, 2),
    Fraction(5, 6): Fraction(3, 4),
}


class CosSquared(TransitionFn):
    """p(x) = cos^2(m pi x) for an odd integer m."""

    def __init__(self, m: int, name: str):
        if m % 2 == 0:
            raise ValueError("cos^2(m pi x) is a QMF function only for odd m")
        self.m = m
        self.name = name

    def __repr__(self) -> str:
        return f"CosSquared(m={self.m})"

    def _exact(self, x):
        y = (self.m * x) % 1
        return _COS2.get(y)

    def _float(self, x):
        return math.cos(math.pi * self.m * x) ** 2

    def quad_constant(self):
        return (math.pi * self.m) ** 2

    def endpoints(self):
        return [Fraction(i, 12 * self.m) for i in range(12 * self.m + 1)]

    def to_dict(self):
        return {"builtin": self.name}


class Shannon(TransitionFn):
    """Indicator of [0,1/4) u [3/4,1]."""

    name = "shannon"

    def __repr__(self) -> str:
        return "Shannon()"

    def _exact(self, x):
        return ONE if x < Fraction(1, 4) or x >= Fraction(3, 4) else ZERO

    def _float(self, x):
        return 1.0 if x < 0.25 or x >= 0.75 else 0.0

    def flat_radius(self):
        return Fraction(1, 4)

    def endpoints(self):
        return [ZERO, Fraction(1, 4), HALF, Fraction(3, 4), ONE]

    def to_dict(self):
        return {"builtin": "shannon"}


_BUILTINS = {
    "haar": lambda: CosSquared(1, "haar"),
    "cos3": lambda: CosSquared(3, "cos3"),
    "shannon": Shannon,
}


def builtin(name: str, params: dict | None = None) -> TransitionFn:
    if name not in _BUILTINS:
        raise ValueError(f"unknown builtin filter {name!r}; choose from {sorted(_BUILTINS)}")
    return _BUILTINS[name]()


# ---------------------------------------------------------------------------
# constructed filters


def _dyadic_floor(x: Fraction) -> Fraction:
    """Largest 2^-n not exceeding x (x > 0)."""
    x = as_rational(x)
    if x <= 0:
        raise ValueError("need a positive value")
    n = 0
    while Fraction(1, 2**n) > x:
        n += 1
    return Fraction(1, 2**n)


def _log_modulus(d: Fraction, k: int) -> float:
    # |log2 d|^(-1/k); log2 via ints so huge denominators stay finite
    lg = math.log2(d.numerator) - math.log2(d.denominator)
    return abs(lg) ** (-1.0 / k)


@dataclass(frozen=True)
class Piece:
    lo: Fraction
    hi: Fraction
    kind: str  # one | zero | exit | barrier | linear
    v0: object = None
    v1: object = None


def _value_json(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


def _value_from_json(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


class ConstructedFilter(TransitionFn):
    """Piecewise filter defined on [0,1/2] and reflected by p(x) = 1 - p(x*) on (1/2,1]."""

    def __init__(
        self,
        theorem: str,
        B: ClosedSet1D,
        N_e: IntervalSet,
        pieces: Sequence[Piece],
        eps: Fraction | None = None,
        k: int | None = None,
        delta: Fraction | None = None,
        radius: Fraction | None = None,
        D: int = 64,
    ):
        self.theorem = theorem
        self.name = f"constructed-{theorem}"
        self.B = B
        self.exit_set, self.barrier_set = (closure(s) for s in exit_and_barrier(B))
        self.N_e = N_e
        self.N_b = N_e.star().closure()
        self.eps = eps
        self.k = k
        self.delta = delta
        self.radius = radius
        self.D = D
        if eps is not None:
            self.N_0 = IntervalSet([Interval(0, eps), Interval(1 - eps, 1)])
            self.N_half = IntervalSet([Interval(HALF - eps, HALF + eps)])
        else:
            self.N_0 = self.N_half = EMPTY
        self.pieces = tuple(pieces)
        self._los = [pc.lo for pc in self.pieces]

    def __repr__(self) -> str:
        return f"ConstructedFilter(theorem={self.theorem}, B={self.B!r}, eps={self.eps}, k={self.k})"

    # evaluation
    def _f(self, d: Fraction):
        if d == 0:
            return ZERO
        if self.theorem == "1":
            return _log_modulus(d, self.k)
        return d

    def _exit_dist(self, x: Fraction) -> Fraction:
        E = self.exit_set
        if isinstance(E, IntervalSet):
            return E.dist(x)
        if x in E:
            return ZERO
        return E.dist_bounds(x, self.D)[1]

    def _piece_value(self, pc: Piece, x: Fraction):
        if pc.kind == "one":
            return ONE
        if pc.kind == "zero":
            return ZERO
        if pc.kind == "exit":
            return self._f(self._exit_dist(x))
        if pc.kind == "barrier":
            v = self._f(self._exit_dist(star_interval(x)))
            return 1 - v
        if pc.kind == "linear":
            if pc.hi == pc.lo:
                return pc.v0
            t = (x - pc.lo) / (pc.hi - pc.lo)
            if isinstance(pc.v0, Fraction) and isinstance(pc.v1, Fraction):
                return pc.v0 + (pc.v1 - pc.v0) * t
            return float(pc.v0) + (float(pc.v1) - float(pc.v0)) * float(t)
        raise ValueError(f"unknown piece kind {pc.kind}")

    def _half(self, x: Fraction):
        i = bisect_right(self._los, x) - 1
        return self._piece_value(self.pieces[max(i, 0)], x)

    def _exact(self, x: Fraction):
        v = self._half(x) if x <= HALF else 1 - self._half(x - HALF)
        return v

    def _float(self, x: float) -> float:
        return float(self._exact(Fraction(x)))

    def endpoints(self):
        out = set()
        for pc in self.pieces:
            out.update((pc.lo, pc.hi, pc.lo + HALF, pc.hi + HALF))
        # zeros and ones off the piece boundaries: |log d|^(-1/k) is far from 0 near them
        for S in (self.exit_set, self.barrier_set):
            if isinstance(S, IntervalSet):
                out.update(S.endpoints())
            elif not S.is_empty():
                out.update(tau(S.aut.representative(w)) for w in S.aut.words(8))
        return sorted(x for x in out if 0 <= x <= 1)

    def flat_radius(self):
        return self.eps or ZERO

    def zero_set_contains(self, x) -> bool:
        x = as_rational(x)
        return x in self.N_half or x in self.exit_set

    def one_set_contains(self, x) -> bool:
        x = as_rational(x)
        return x in self.N_0 or x in self.barrier_set

    # Step-1 bookkeeping
    def verify_step1(self) -> dict[str, bool]:
        """Clauses (i)-(iv) of the construction plus the region disjointness used by it."""
        cex, cbar = self.exit_set, self.barrier_set
        specials = IntervalSet.points([0, HALF, 1])

        def inside(S, N: IntervalSet) -> bool:
            if S.is_empty():
                return True
            if isinstance(S, IntervalSet):
                return S.closure().issubset(N)
            return S.issubset_cover(N)

        both = self.N_e.union(self.N_b)
        out = {
            "i": inside(cex, self.N_e) and inside(cbar, self.N_b),
            "ii": self.N_e.star() == self.N_b,
            "iii": both.intersect(specials).is_empty(),
            "iv": inside(cex, self.N_e.interior()),
            "N_e_disjoint_N_b": self.N_e.intersect(self.N_b).is_empty(),
        }
        if self.eps is not None:
            out["N0_Nhalf_clear"] = both.intersect(self.N_0.union(self.N_half)).is_empty()
            out["k_fits_eps"] = Fraction(1, 2**self.k) < self.eps
        return out

    def to_dict(self) -> dict:
        return {
            "construct": {
                "theorem": self.theorem,
                "B": set_to_dict(self.B),
                "epsilon": None if self.eps is None else str(self.eps),
                "k": self.k,
                "delta": None if self.delta is None else str(self.delta),
                "radius": None if self.radius is None else str(self.radius),
                "N_e": [[str(iv.lo), str(iv.hi)] for iv in self.N_e.intervals],
                "pieces": [
                    [str(pc.lo), str(pc.hi), pc.kind, _value_json(pc.v0), _value_json(pc.v1)]
                    for pc in self.pieces
                ],
            }
        }


def _pieces_for(
    regions: list[tuple[Fraction, Fraction, str]], value_at, start_value=ONE, end_value=ZERO
) -> list[Piece]:
    """Tile [0,1/2] with the given closed regions and linear gaps between them."""
    regions = sorted(regions)
    pieces: list[Piece] = []
    cursor = ZERO
    prev_value = start_value
    for lo, hi, kind in regions:
        if lo > cursor:
            pieces.append(Piece(cursor, lo, "linear", prev_value, value_at(Piece(lo, hi, kind), lo)))
        elif lo < cursor:
            raise ValueError("overlapping regions")
        pieces.append(Piece(lo, hi, kind))
        cursor = hi
        prev_value = value_at(Piece(lo, hi, kind), hi)
    if cursor < HALF:
        pieces.append(Piece(cursor, HALF, "linear", prev_value, end_value))
    return pieces


def _region_list(N: IntervalSet, kind: str) -> list[tuple[Fraction, Fraction, str]]:
    part = N.intersect(IntervalSet([Interval(0, HALF)])).closure()
    return [(iv.lo, iv.hi, kind) for iv in part.intervals]


def _separation(cex: ClosedSet1D, cbar: ClosedSet1D, B: ClosedSet1D, D: int) -> Fraction | None:
    """A positive lower bound on the distance between the two closures, or None if they meet."""
    if cex.is_empty() or cbar.is_empty():
        return ONE
    lo, hi = set_distance_bounds(cex, cbar, D)
    if lo > 0:
        return lo
    return None


def _cover(S: ClosedSet1D, r: Fraction) -> IntervalSet:
    if S.is_empty():
        return EMPTY
    return S.cover(r)


def _choose_neighbourhoods(cex, cbar, r: Fraction, avoid: IntervalSet, tries: int = 60):
    specials = IntervalSet.points([HALF])
    for _ in range(tries):
        N_e = _cover(cex, r)
        N_b = N_e.star()
        ends = IntervalSet.points(N_e.endpoints())
        ok = (
            N_e.intersect(N_b).is_empty()
            and ends.intersect(specials).is_empty()
            and N_e.union(N_b).intersect(avoid).is_empty()
        )
        if ok:
            return N_e, r
        r /= 2
    raise ConstructionError("neighbourhoods", "could not separate N_e from its star image")


def construct_prop_4_2(B: ClosedSet1D, D: int = 64) -> ConstructedFilter:
    """Continuous transition function for which B is invariant: p = d_{exit} near the exit
    set, 1 - d_{exit}(x*) near the barrier set, linear elsewhere on [0,1/2]."""
    ex, bar = exit_and_barrier(B)
    cex, cbar = closure(ex), closure(bar)
    delta = _separation(cex, cbar, B, D)
    if delta is None:
        raise ConstructionError(
            "disjointness", "the closed exit set meets the closed barrier set, so no continuous p exists"
        )
    if cex.is_empty():
        N_e = EMPTY
        r = None
    else:
        N_e, r = _choose_neighbourhoods(cex, cbar, _dyadic_floor(min(delta, ONE) / 4), EMPTY)
    N_b = N_e.star()
    proto = ConstructedFilter("prop", B, N_e, [], D=D)
    regions = _region_list(N_e, "exit") + _region_list(N_b.closure(), "barrier")
    covered = IntervalSet([Interval(lo, hi) for lo, hi, _ in regions]) if regions else EMPTY
    start = ONE
    end = ZERO
    if HALF in covered:
        end = proto._piece_value(next(Piece(lo, hi, k) for lo, hi, k in regions if lo <= HALF <= hi), HALF)
        start = 1 - end
    if ZERO in covered:
        start = proto._piece_value(next(Piece(lo, hi, k) for lo, hi, k in regions if lo <= 0 <= hi), ZERO)
    pieces = _pieces_for(regions, proto._piece_value, start, end)
    return ConstructedFilter("prop", B, N_e, pieces, delta=delta, radius=r, D=D)


def construct_thm_1(B: ClosedSet1D, eps="auto", k="auto", D: int = 64) -> ConstructedFilter:
    """A continuous QMF function for which B is invariant, equal to 1 near 0 and to
    |log2 d_exit|^(-1/k) near the exit set."""
    if isinstance(B, IntervalSet) and not B.is_closed():
        raise ConstructionError("closed", "B must be closed")
    if B.is_empty():
        raise ConstructionError("nonempty", "B is empty")
    if ZERO in B or ONE in B:
        raise ConstructionError("interior", "B must lie inside (0,1)")
    rep = check_lemma_4_3(B, D)
    if not rep.theta_invariant:
        raise ConstructionError("theta-invariance", "B must equal its image under the doubling map")
    if not rep.no_binary_rationals:
        raise ConstructionError("binary-rationals", "B or its exit/barrier closures contain binary rationals")
    if not rep.disjointness:
        raise ConstructionError("disjointness", "the closed exit and barrier sets meet")
    cex, cbar = closure(rep.exit_set), closure(rep.barrier_set)
    delta = rep.delta
    gap0 = min(S.dist_bounds(c, D)[0] for S in (cex, cbar) for c in (ZERO, HALF, ONE))
    specials = IntervalSet.points([ZERO, HALF, ONE])
    N_e, r = _choose_neighbourhoods(cex, cbar, _dyadic_floor(min(delta, gap0) / 8), specials)
    N_b = N_e.star()
    both = N_e.union(N_b)
    gap = min(both.dist(c) for c in (ZERO, HALF, ONE))
    if eps == "auto" or eps is None:
        eps = _dyadic_floor(min(gap, delta) / 4)
    eps = as_rational(eps)
    if not ZERO < eps < Fraction(1, 4):
        raise ConstructionError("epsilon", "epsilon must lie in (0, 1/4)")
    N_0 = IntervalSet([Interval(0, eps), Interval(1 - eps, 1)])
    N_half = IntervalSet([Interval(HALF - eps, HALF + eps)])
    if not both.intersect(N_0.union(N_half)).is_empty():
        raise ConstructionError("epsilon", f"N_0 = [0,{eps}] u [{1 - eps},1] would meet N_e or N_b")
    if k == "auto" or k is None:
        k = math.ceil(math.log2(1 / eps)) + 1
    k = int(k)
    if not (k >= 1 and Fraction(1, 2**k) < eps):
        raise ConstructionError("k", f"need 2^-k < epsilon, got k={k}, epsilon={eps}")
    proto = ConstructedFilter("1", B, N_e, [], eps=eps, k=k, D=D)
    regions = (
        [(ZERO, eps, "one"), (HALF - eps, HALF, "zero")]
        + _region_list(N_e, "exit")
        + _region_list(N_b, "barrier")
    )
    pieces = _pieces_for(regions, proto._piece_value)
    return ConstructedFilter("1", B, N_e, pieces, eps=eps, k=k, delta=delta, radius=r, D=D)


# ---------------------------------------------------------------------------
# checks


def qmf_residual(p: TransitionFn, n: int = 4096) -> float:
    """max |p(x) + p(x*) - 1| over the grid i/n and the filter's region endpoints."""
    if n < 2:
        raise ValueError("grid size must be >= 2")
    pts = {Fraction(i, n) for i in range(n + 1)}
    pts.update(e for e in p.endpoints() if 0 <= e <= 1)
    worst = 0.0
    for x in sorted(pts):
        r = p(x) + p(star_interval(x)) - 1
        worst = max(worst, abs(float(r)))
    return worst


@dataclass
class Verdict:
    passed: bool
    max_abs: float
    worst_point: Fraction | None = None
    method: str = ""
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed


def _sample_set(S: ClosedSet1D, m: int = 256, depth: int = 12) -> list[Fraction]:
    if isinstance(S, IntervalSet):
        pts = []
        for iv in S.intervals:
            if iv.is_point:
                pts.append(iv.lo)
                continue
            width = iv.hi - iv.lo
            pts.extend(iv.lo + width * Fraction(i, m) for i in range(1, m))
            if iv.lo_closed:
                pts.append(iv.lo)
            if iv.hi_closed:
                pts.append(iv.hi)
            # approach open ends closely
            tiny = width / 2**40
            if not iv.lo_closed:
                pts.append(iv.lo + tiny)
            if not iv.hi_closed:
                pts.append(iv.hi - tiny)
        return pts
    words = S.aut.words(depth)
    return [tau(S.aut.representative(w)) for w in words]


def invariance_check(p: TransitionFn, B: ClosedSet1D, tol: float = 1e-15) -> Verdict:
    """B is invariant for p iff p vanishes on the exit set of B."""
    ex, _ = exit_and_barrier(B)
    if ex.is_empty():
        return Verdict(True, 0.0, None, "no exit points")
    if isinstance(p, ConstructedFilter) and _same_set(p.B, B):
        pts = _sample_set(ex)
        bad = [x for x in pts if p(x) != 0]
        return Verdict(not bad, max((float(p(x)) for x in pts), default=0.0), bad[0] if bad else None, "zero-set metadata")
    pts = _sample_set(ex)
    worst, at = 0.0, None
    for x in pts:
        v = abs(float(p(x)))
        if v > worst:
            worst, at = v, x
    method = "exact points" if isinstance(ex, IntervalSet) and ex.is_points else "dense sample"
    return Verdict(worst <= tol, worst, at, method)


def _same_set(A, B) -> bool:
    if isinstance(A, IntervalSet) and isinstance(B, IntervalSet):
        return A == B
    if isinstance(A, SftBacked) and isinstance(B, SftBacked):
        return A.K == B.K
    return A is B


@dataclass
class CohenVerdict:
    passed: bool
    inf: float
    argmin: tuple | None
    covered: bool
    uncovered: Fraction | None
    tail_bound: float | None


def cohen_check(
    p: TransitionFn,
    T: Sequence[tuple],
    j_max: int = 30,
    grid_n: int = 4096,
    tol: float = 1e-12,
) -> CohenVerdict:
    """inf of p(x/2^j) over x in T and 1 <= j <= j_max, for a compact T (real intervals)
    that meets every residue class modulo 1."""
    T = [(as_rational(a), as_rational(b)) for a, b in T]
    # covering modulo 1
    pieces = []
    for a, b in T:
        if b - a >= 1:
            pieces.append(Interval(0, 1))
            continue
        fa = a - math.floor(a)
        fb = fa + (b - a)
        if fb <= 1:
            pieces.append(Interval(fa, fb))
        else:
            pieces.append(Interval(fa, 1))
            pieces.append(Interval(0, fb - 1))
    cov = IntervalSet(pieces)
    if ZERO in cov or ONE in cov:
        cov = cov.union(IntervalSet.points([0, 1]))
    missing = IntervalSet([Interval(0, 1)]).difference(cov)
    if not missing.is_empty():
        iv = missing.intervals[0]
        return CohenVerdict(False, float("nan"), None, False, (iv.lo + iv.hi) / 2, None)
    worst, at = math.inf, None
    marks = sorted({e % 1 for e in p.endpoints()})
    for a, b in T:
        grid = [a + (b - a) * Fraction(i, grid_n) for i in range(grid_n + 1)]
        grid = [float(x) for x in grid]
        for j in range(1, j_max + 1):
            s = Fraction(1, 2**j)
            # points of T sent onto a region boundary of p by x -> x/2^j
            pulled = [
                (e + n) * 2**j
                for e in marks
                for n in range(math.floor(a * s - e), math.ceil(b * s - e) + 1)
                if a <= (e + n) * 2**j <= b
            ]
            for x in pulled:
                v = float(p(x * s))
                if v < worst:
                    worst, at = v, (x, j)
            # float grid; exact boundary values above win near-ties
            for x in grid:
                v = p(x * float(s))
                if v < worst - 1e-12:
                    worst, at = v, (Fraction(x), j)
    h = max(max(abs(a), abs(b)) for a, b in T) / 2**j_max
    tail = p.lower_bound_near_zero(h)
    return CohenVerdict(worst > tol, worst, at, True, None, tail)


# ---------------------------------------------------------------------------
# (de)serialization


def filter_to_dict(p: TransitionFn) -> dict:
    return p.to_dict()


def filter_from_dict(d: dict) -> TransitionFn:
    if "builtin" in d:
        return builtin(d["builtin"])
    c = d["construct"]
    B = set_from_dict(c["B"])
    if "pieces" not in c:
        theorem = str(c.get("theorem", "1"))
        if theorem == "1":
            return construct_thm_1(B, c.get("epsilon", "auto"), c.get("k", "auto"))
        return construct_prop_4_2(B)
    pieces = [
        Piece(Fraction(lo), Fraction(hi), kind, _value_from_json(v0), _value_from_json(v1))
        for lo, hi, kind, v0, v1 in c["pieces"]
    ]
    N_e = IntervalSet([Interval(Fraction(lo), Fraction(hi)) for lo, hi in c["N_e"]])
    opt = lambda v: None if v is None else Fraction(v)  # noqa: E731
    return ConstructedFilter(
        c["theorem"], B, N_e, pieces, eps=opt(c["epsilon"]), k=c["k"], delta=opt(c["delta"]), radius=opt(c["radius"])
    )
