"""Seeded simulation of the dyadic Markov chain, coupling diagnostics, absorption
estimates and the exhaustive path-bound verifier.

Randomness: path ``i`` under master seed ``s`` draws from its own stream
``SeedSequence(s, spawn_key=(i,))``, one uniform per step, so results do not
depend on how paths are spread over workers and longer runs extend shorter ones.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .filters import ConstructedFilter, TransitionFn
from .intervals import HALF, ClosedSet1D, IntervalSet, as_rational, check_lemma_4_3, closure, exit_and_barrier
from .subshift import SftSubshift, rho_to_set
from .symbolic import SymbolSeq

WORKERS_ENV = "QMFINV_WORKERS"


class FilterDefect(ValueError):
    """A transition probability fell outside [0,1]."""


def uniforms(seed: int, path_id: int, T: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(path_id,))))
    return rng.random(T)


def workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class PathSample:
    x0: object
    seed: int
    path_id: int
    symbols: tuple
    states: list

    @property
    def T(self) -> int:
        return len(self.symbols)


def _prob0(p: TransitionFn, xi: Fraction, t: int):
    q = p(xi / 2)
    if not 0 <= q <= 1:
        raise FilterDefect(f"p({xi / 2}) = {q} outside [0,1] at step {t}")
    return q


def simulate(p, x0, T: int, seed: int, path_id: int = 0) -> PathSample:
    """One path of length T.  With a transition function the state is a rational
    in [0,1] and digit 0 has probability p(xi/2); with a g-function the state is a
    sequence and digit j has probability g((xi, j))."""
    if T < 1:
        raise ValueError("T must be >= 1")
    u = uniforms(seed, path_id, T)
    if isinstance(p, TransitionFn):
        xi = as_rational(x0)
        states, symbols = [xi], []
        for t in range(1, T + 1):
            d = 0 if u[t - 1] < _prob0(p, xi, t) else 1
            xi = xi / 2 + Fraction(d, 2)
            symbols.append(d)
            states.append(xi)
        return PathSample(x0, seed, path_id, tuple(symbols), states)
    g = p
    xi = x0 if isinstance(x0, SymbolSeq) else SymbolSeq.parse(x0, g.J)
    states, symbols = [xi], []
    for t in range(1, T + 1):
        probs = [g(xi.append(j)) for j in range(g.J + 1)]
        if any(not 0 <= q <= 1 for q in probs):
            raise FilterDefect(f"g values {probs} outside [0,1] at step {t}")
        acc, d = 0, g.J
        for j, q in enumerate(probs):
            acc += q
            if u[t - 1] < acc:
                d = j
                break
        xi = xi.append(d)
        symbols.append(d)
        states.append(xi)
    return PathSample(x0, seed, path_id, tuple(symbols), states)


# ---------------------------------------------------------------------------
# coupling


@dataclass
class CouplingReport:
    distances: list
    couple_to: int | None  # None: couples for the whole path
    decouple_times: list
    converged: bool


def coupling_report(path: PathSample, ref, threshold=Fraction(1, 2**20), window: int = 10) -> CouplingReport:
    """Exact distances of the path to ``ref`` (a subshift for sequence paths, a set of
    [0,1] for interval paths) with the coupling horizon and decoupling times."""
    if isinstance(ref, SftSubshift):
        if not isinstance(path.states[0], SymbolSeq):
            raise ValueError("a subshift needs a sequence-valued path")
        ds = [rho_to_set(s, ref) for s in path.states]
    else:
        if isinstance(path.states[0], SymbolSeq):
            raise ValueError("a set in [0,1] needs an interval path")
        ds = [ref.dist(s) for s in path.states]
    couple_to = None
    for t, d in enumerate(ds):
        if d != ds[0] / 2**t:
            couple_to = t - 1
            break
    decouple = [t for t in range(1, len(ds)) if ds[t] > ds[t - 1]]
    tail = ds[-window:]
    return CouplingReport(ds, couple_to, decouple, all(d <= threshold for d in tail))


# ---------------------------------------------------------------------------
# absorption


@dataclass
class PathOutcome:
    path_id: int
    t_absorbed: int  # -1 if never within T steps
    final_num: int
    final_den: int
    decouple_count: int


def _absorbing_eps(p: TransitionFn, eps) -> Fraction:
    if isinstance(p, ConstructedFilter) and p.eps is not None:
        return p.eps  # N_0 entry; p = 1 there so the chain never leaves
    return as_rational(eps)


def _reference(p: TransitionFn):
    if isinstance(p, ConstructedFilter) and isinstance(p.B, IntervalSet):
        return p.B
    return IntervalSet.points([0, 1])


def run_path(p: TransitionFn, x0, T: int, seed: int, path_id: int, eps, stop_on_absorb: bool = False, ref=None):
    """Lean single path: hitting time of the eps-neighbourhood of {0,1}, final state and
    the number of strict distance increases with respect to ``ref``."""
    eps = _absorbing_eps(p, eps)
    u = uniforms(seed, path_id, T)
    xi = as_rational(x0)
    t_abs = 0 if (xi <= eps or xi >= 1 - eps) else -1
    dec = 0
    prev = ref.dist(xi) if ref is not None else None
    for t in range(1, T + 1):
        if t_abs >= 0 and stop_on_absorb:
            break
        d = 0 if u[t - 1] < _prob0(p, xi, t) else 1
        xi = xi / 2 + Fraction(d, 2)
        if t_abs < 0 and (xi <= eps or xi >= 1 - eps):
            t_abs = t
        if ref is not None:
            cur = ref.dist(xi)
            if cur > prev:
                dec += 1
            prev = cur
    return PathOutcome(path_id, t_abs, xi.numerator, xi.denominator, dec)


def _run_chunk(args):
    p, x0, T, seed, ids, eps, stop, with_ref = args
    ref = _reference(p) if with_ref else None
    return [run_path(p, x0, T, seed, i, eps, stop, ref) for i in ids]


def run_paths(p, x0, n_paths: int, T: int, seed: int, eps=Fraction(1, 2**20), stop_on_absorb=False, with_ref=False):
    """All paths, in path-id order; fanned out over the configured number of workers."""
    ids = list(range(n_paths))
    nw = min(workers(), max(1, n_paths))
    if nw == 1:
        return _run_chunk((p, x0, T, seed, ids, eps, stop_on_absorb, with_ref))
    chunks = [ids[i::nw] for i in range(nw)]
    with ProcessPoolExecutor(nw) as ex:
        parts = list(ex.map(_run_chunk, [(p, x0, T, seed, c, eps, stop_on_absorb, with_ref) for c in chunks]))
    out = [o for part in parts for o in part]
    return sorted(out, key=lambda o: o.path_id)


@dataclass
class AbsorptionEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    absorbed: int
    n_paths: int
    T: int
    hitting_times: list = field(repr=False, default_factory=list)

    def at(self, T: int) -> "AbsorptionEstimate":
        """The estimate for a shorter horizon from the same paths."""
        k = sum(1 for t in self.hitting_times if 0 <= t <= T)
        lo, hi = proportion_confint(k, self.n_paths, alpha=0.05, method="wilson")
        return AbsorptionEstimate(k / self.n_paths, lo, hi, k, self.n_paths, T, self.hitting_times)


def absorption_estimate(p: TransitionFn, x0, n_paths: int, T: int, eps=Fraction(1, 2**20), seed: int = 0):
    """Fraction of paths that come within eps of {0,1} by time T (for constructed filters:
    that enter N_0), with a 95% Wilson score interval."""
    if n_paths < 1:
        raise ValueError("need at least one path")
    eps = as_rational(eps)
    if not 0 < eps < HALF:
        raise ValueError("eps must lie in (0, 1/2)")
    outs = run_paths(p, x0, n_paths, T, seed, eps, stop_on_absorb=True)
    hits = [o.t_absorbed for o in outs]
    k = sum(1 for t in hits if t >= 0)
    lo, hi = proportion_confint(k, n_paths, alpha=0.05, method="wilson")
    return AbsorptionEstimate(k / n_paths, lo, hi, k, n_paths, T, hits)


# ---------------------------------------------------------------------------
# path bounds near an invariant set


@dataclass
class PathBoundReport:
    alpha: Fraction
    delta: Fraction
    violations: int
    min_ratio: Fraction
    nodes_checked: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _half_separation(B: ClosedSet1D, cex: ClosedSet1D) -> Fraction:
    """delta with |x - 1/2| > delta on B and the closed exit set (half the distance)."""
    ds = [S.dist_bounds(HALF)[0] for S in (B, cex) if not S.is_empty()]
    return min(ds) / 2


class PathBoundChecker:
    def __init__(self, B: ClosedSet1D, x0):
        if isinstance(B, IntervalSet) and not B.is_closed():
            raise ValueError("B must be closed")
        if 0 in B or 1 in B:
            raise ValueError("B must lie inside (0,1)")
        if not check_lemma_4_3(B).theta_invariant:
            raise ValueError("B must be invariant under the doubling map")
        x0 = as_rational(x0)
        if x0 in B:
            raise ValueError("x0 must lie outside B")
        self.B = B
        self.cex = closure(exit_and_barrier(B)[0])
        self.delta = _half_separation(B, self.cex)
        self.alpha = min(self.delta, B.dist(x0))
        self.x0 = x0
        self.violations = 0
        self.min_ratio = None
        self.nodes = 0

    def visit(self, xi: Fraction, t: int) -> None:
        self.nodes += 1
        bound = self.alpha / 2**t
        ds = [self.B.dist(xi)]
        if t >= 1:
            ds.append(self.cex.dist(xi))
        for d in ds:
            if d < bound:
                self.violations += 1
            r = d / bound
            if self.min_ratio is None or r < self.min_ratio:
                self.min_ratio = r

    def exhaustive(self, depth: int) -> None:
        stack = [(self.x0, 0)]
        while stack:
            xi, t = stack.pop()
            self.visit(xi, t)
            if t < depth:
                stack.append((xi / 2, t + 1))
                stack.append((xi / 2 + HALF, t + 1))

    def path(self, digits: Sequence[int]) -> None:
        xi = self.x0
        self.visit(xi, 0)
        for t, d in enumerate(digits, 1):
            xi = xi / 2 + Fraction(d, 2)
            self.visit(xi, t)

    def report(self) -> PathBoundReport:
        return PathBoundReport(self.alpha, self.delta, self.violations, self.min_ratio, self.nodes)


def lemma_4_4_check(
    B: ClosedSet1D,
    x0,
    paths: Iterable[Sequence[int]] | None = None,
    exhaustive_depth: int = 0,
    n_samples: int = 0,
    sample_depth: int = 40,
    seed: int = 0,
) -> PathBoundReport:
    """Check d_B(xi_t) >= alpha 2^-t (t >= 0) and d_exit(xi_t) >= alpha 2^-t (t >= 1)
    with alpha = min(delta, d_B(x0)), on supplied paths, on every digit string up to
    ``exhaustive_depth`` and on ``n_samples`` uniformly random digit strings."""
    chk = PathBoundChecker(B, x0)
    if exhaustive_depth:
        chk.exhaustive(exhaustive_depth)
    for digs in paths or ():
        chk.path(digs)
    if n_samples:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        for row in rng.integers(0, 2, size=(n_samples, sample_depth)):
            chk.path([int(d) for d in row])
    return chk.report()


# ---------------------------------------------------------------------------
# variation profile of a g-function


def _random_point(rng, J: int, head: tuple, extra: int) -> SymbolSeq:
    n_suf = int(rng.integers(0, extra + 1))
    n_per = int(rng.integers(1, 5))
    suf = tuple(int(a) for a in rng.integers(0, J + 1, size=n_suf))
    per = tuple(int(a) for a in rng.integers(0, J + 1, size=n_per))
    return SymbolSeq(per, suf + head, J)


def var_profile(g, n_max: int, samples: int = 200, seed: int = 0) -> list[tuple[int, float, int]]:
    """(n, estimate of var_n(g), pairs used) for n = 1..n_max, where var_n is the largest
    change of g between points agreeing on their last n symbols.  Raw estimates are
    lower bounds of var_n; the reported profile is made nonincreasing by taking
    running maxima from the right."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    raw = []
    for n in range(1, n_max + 1):
        best = 0.0
        for _ in range(samples):
            head = tuple(int(a) for a in rng.integers(0, g.J + 1, size=n))
            a = _random_point(rng, g.J, head, 8)
            b = _random_point(rng, g.J, head, 8)
            best = max(best, abs(float(g(a)) - float(g(b))))
        raw.append(best)
    out = []
    run = 0.0
    for n in range(n_max, 0, -1):
        run = max(run, raw[n - 1])
        out.append((n, run, samples))
    return out[::-1]


def ci_overlaps(est: AbsorptionEstimate, lo: float, hi: float) -> bool:
    return est.ci_low <= hi and lo <= est.ci_high


def wilson(k: int, n: int) -> tuple[float, float]:
    lo, hi = proportion_confint(k, n, alpha=0.05, method="wilson")
    return float(lo), float(hi)

