"""g-functions on {0,...,J}^{Z_-}: lifts of transition functions, the construction of a
continuous g whose zero set is the closed exit set of a subshift, and the checks on them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .automata import SymbolicSet
from .filters import TransitionFn
from .intervals import tau
from .subshift import (
    CylinderUnion,
    GeneratorFamily,
    SftSubshift,
    check_prop_2_2,
    condition_thm_1_2,
    star_intersection,
)
from .symbolic import SymbolSeq, format_word, shift


class GConstructionError(ValueError):
    def __init__(self, message: str, witness: SymbolSeq | None = None):
        super().__init__(message if witness is None else f"{message}; witness {witness}")
        self.witness = witness


class GFunction:
    J: int

    def __call__(self, seq: SymbolSeq):
        raise NotImplementedError

    def sibling_sum(self, zeta: SymbolSeq):
        return sum(self(zeta.append(j)) for j in range(self.J + 1))


class LiftedG(GFunction):
    """g = p o tau, so that g((xi, j)) = p(tau(xi)/2 + j/2)."""

    def __init__(self, p: TransitionFn):
        self.p = p
        self.J = 1

    def __repr__(self) -> str:
        return f"LiftedG({self.p!r})"

    def __call__(self, seq: SymbolSeq):
        return self.p(tau(seq))


def lift(p: TransitionFn) -> LiftedG:
    return LiftedG(p)


def _languages_meet_depth(sets: list[SymbolicSet], limit: int = 4096) -> int | None:
    prod = sets[0]
    for s in sets[1:]:
        prod = prod.language_meets(s)
    return prod.first_empty_depth(limit)


class ConstructedG(GFunction):
    """Continuous g with zero set exactly the closed exit set Z of K.

    Depth-m words are grouped into sibling classes u0, ..., uJ.  In a class where the
    cells C(ua), a in A, meet Z (A is never the whole class by the choice of m):
    g = rho(xi, Z)/J on those cells and the remainder 1 - sum_a rho((zeta, a), Z)/J is
    split evenly over the other cells.  Classes with A empty get 1/(J+1).  For J = 1
    this is g = rho on C(ua) and 1 - rho(xi*, Z) on its sibling.
    """

    def __init__(self, K: SftSubshift, m: int | None = None):
        self.K = K
        self.J = K.J
        self.Z = K.exit_closure()
        if m is None:
            m = _languages_meet_depth([self.Z.star(j) if j else self.Z for j in range(self.J + 1)])
            if m is None:
                raise GConstructionError("no separating window length found")
        self.m = m
        self.cells = tuple(self.Z.words(m))
        self._classes: dict = {}
        self.default = Fraction(1, self.J + 1)

    def __repr__(self) -> str:
        return f"ConstructedG({self.K!r}, m={self.m})"

    def _A(self, u: tuple) -> tuple:
        hit = self._classes.get(u)
        if hit is None:
            hit = tuple(a for a in range(self.J + 1) if self.Z.has_initial_word(u + (a,)))
            self._classes[u] = hit
        return hit

    def rho_Z(self, seq: SymbolSeq) -> Fraction:
        return self.Z.distance(seq)

    def __call__(self, seq: SymbolSeq) -> Fraction:
        if seq.J != self.J:
            raise ValueError("alphabet mismatch")
        word = seq.last(self.m)
        u, b = word[:-1], word[-1]
        A = self._A(u)
        if not A:
            return self.default
        if b in A:
            return self.rho_Z(seq) / self.J
        zeta = shift(seq)
        taken = sum(self.rho_Z(zeta.append(a)) for a in A) / self.J
        return (1 - taken) / (self.J + 1 - len(A))

    def zero_set_contains(self, seq: SymbolSeq) -> bool:
        return seq in self.Z

    def lower_bound_on(self, K: SftSubshift) -> Fraction | None:
        """Positive lower bound of g on K when K misses Z, else None."""
        d = K.automaton.language_meets(self.Z).first_empty_depth()
        if d is None:
            return None
        J, m = self.J, self.m
        near = Fraction(1, 2 ** max(d - 1, 0)) / J
        # sibling cells: (1 - |A| 2^-m / J) / (J + 1 - |A|) at worst
        others = min((1 - Fraction(a, 2**m) / J) / (J + 1 - a) for a in range(1, J + 1))
        return min(near, others, self.default)

    def to_dict(self) -> dict:
        return {
            "kind": "constructed",
            "J": self.J,
            "forbidden": sorted(format_word(w) for w in self.K.forbidden),
            "m": self.m,
            "cells": [format_word(w) for w in self.cells],
            "formulas": {"cell": "rho/J", "sibling": "(1 - sum rho/J)/(J+1-|A|)"},
            "default": str(self.default),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConstructedG":
        g = cls(SftSubshift(int(d["J"]), d["forbidden"]), int(d["m"]))
        if [format_word(w) for w in g.cells] != list(d["cells"]):
            raise ValueError("stored cells do not match the subshift")
        return g


def construct_thm_1_2(K: SftSubshift) -> ConstructedG:
    """Continuous g whose zero set is the closure of the exit set of K.

    Refused, with a witness, when the star images of that closure have a common point."""
    cond = condition_thm_1_2(K)
    if not cond:
        raise GConstructionError("the star images of the closed exit set share a point", cond.witness)
    return ConstructedG(K)


def g_sum_residual(g: GFunction, samples: Iterable[SymbolSeq]):
    """max |sum_j g((xi, j)) - 1| over the samples (exact for constructed g)."""
    worst = Fraction(0)
    for s in samples:
        r = abs(g.sibling_sum(s) - 1)
        if r > worst:
            worst = r
    return worst


def sample_points(J: int, n: int, seed: int = 0, max_suffix: int = 12, max_period: int = 12) -> list[SymbolSeq]:
    """n random eventually periodic points with suffix and period lengths up to the given bounds."""
    import numpy as np

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    out = []
    for _ in range(n):
        s = int(rng.integers(0, max_suffix + 1))
        q = int(rng.integers(1, max_period + 1))
        out.append(
            SymbolSeq(
                tuple(int(a) for a in rng.integers(0, J + 1, size=q)),
                tuple(int(a) for a in rng.integers(0, J + 1, size=s)),
                J,
            )
        )
    return out


@dataclass
class GVerdict:
    passed: bool
    worst: object = None
    worst_point: SymbolSeq | None = None
    method: str = ""

    def __bool__(self) -> bool:
        return self.passed


def _cylinder_reps(aut: SymbolicSet, depth: int) -> list[SymbolSeq]:
    return [aut.representative(w) for w in aut.words(depth)]


def g_invariance_check(g: GFunction, K: SftSubshift, depth: int = 12) -> GVerdict:
    """K is g-invariant iff g vanishes on the exit set of K."""
    if g.J != K.J:
        raise ValueError("alphabet mismatch")
    Z = K.exit_closure()
    reps = _cylinder_reps(Z, depth)
    if isinstance(g, ConstructedG) and g.K == K:
        bad = [s for s in reps if g(s) != 0]
        return GVerdict(not bad, None, bad[0] if bad else None, "zero-set metadata")
    worst, at = 0.0, None
    for s in reps:
        v = abs(float(g(s)))
        if v > worst:
            worst, at = v, s
    return GVerdict(worst <= 1e-15, worst, at, f"exit-closure cylinder representatives, depth {depth}")


@dataclass
class StrictG:
    g: ConstructedG
    lower_bound: Fraction


@dataclass
class Refusal:
    reason: str
    witness: SymbolSeq | None
    distance: Fraction | None = None

    def __bool__(self) -> bool:
        return False


def strict_g(K, L: int | None = None):
    """A continuous g, positive on K, for which K is invariant; or a refusal.

    Finite type: the constructed g, with a positive lower bound of g on K.  A generator
    family truncated at L is refused when a point of the full subshift lies within
    2^-L of the truncation's exit set (the point is returned as witness)."""
    if isinstance(K, GeneratorFamily):
        rep = check_prop_2_2(K, L)
        if not rep.all_true:
            return Refusal("a point of K lies in the closure of its exit set", rep.witness, rep.witness_distance)
        K = K.truncate(L)
    g = construct_thm_1_2(K)
    lb = g.lower_bound_on(K)
    if lb is None or lb <= 0:
        return Refusal("K meets the closure of its exit set", K.automaton.intersect(g.Z).representative())
    return StrictG(g, lb)


@dataclass
class SubsetVerdict:
    exit_words: tuple
    g_vanishes: bool | None
    continuous_g_exists: bool
    witness: SymbolSeq | None = None


def exit_cylinders(E: CylinderUnion) -> CylinderUnion:
    """E_e^c = Theta^{-1}(E) minus E, again a finite union of cylinders."""
    return E.preimage().intersect(E.complement())


def general_subset_invariance(E: CylinderUnion, g: GFunction | None = None) -> SubsetVerdict:
    """Whether g vanishes on the exit set of E (checked on representatives of each exit
    cylinder) and whether any continuous g can leave E invariant."""
    ex = exit_cylinders(E)
    words = tuple(sorted(format_word(w) for w in ex.words))
    inter = star_intersection(ex.automaton) if not ex.is_empty() else None
    exists = inter is None or inter.is_empty()
    witness = None if exists else inter.representative()
    vanishes = None
    if g is not None:
        reps = []
        for w in ex.words:
            for tail in itertools.product(range(E.J + 1), repeat=2):
                reps.append(SymbolSeq(tail[:1], tail[1:] + w, E.J))
        vanishes = all(g(s) == 0 for s in reps)
    return SubsetVerdict(words, vanishes, exists, witness)


def g_to_dict(g: GFunction) -> dict:
    if isinstance(g, ConstructedG):
        return g.to_dict()
    if isinstance(g, LiftedG):
        return {"kind": "lifted", "filter": g.p.to_dict()}
    raise TypeError(f"cannot serialize {type(g).__name__}")


def g_from_dict(d: dict) -> GFunction:
    if d.get("kind") == "constructed":
        return ConstructedG.from_dict(d)
    if d.get("kind") == "lifted":
        from .filters import filter_from_dict

        return LiftedG(filter_from_dict(d["filter"]))
    raise ValueError(f"unknown g-function kind {d.get('kind')!r}")


__all__ = [
    "GFunction",
    "LiftedG",
    "ConstructedG",
    "lift",
    "construct_thm_1_2",
    "g_sum_residual",
    "g_invariance_check",
    "strict_g",
    "general_subset_invariance",
    "exit_cylinders",
    "sample_points",
]
