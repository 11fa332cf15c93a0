"""The acceptance suite: eleven end-to-end checks with their tolerances and time budgets.

Each check returns a :class:`CriterionResult`; ``run_all`` runs them in order.  The
``quick`` level caps enumeration depth at 10 and path counts at 500.
"""
from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction

from .filters import builtin, cohen_check, construct_prop_4_2, construct_thm_1, invariance_check, qmf_residual
from .gfun import construct_thm_1_2, g_sum_residual, sample_points, strict_g, Refusal, StrictG
from .intervals import Intervals, Points, exit_and_barrier
from .sampler import absorption_estimate, ci_overlaps, lemma_4_4_check, simulate
from .spectral import code_k, phi_hat, recursion_state, sum_phi_hat, xi_t_of_k
from .subshift import ExitSet, SftSubshift, check_prop_2_2, example_3_1, find_exit_witness, rho_to_set
from .symbolic import SymbolSeq, occurs


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    @property
    def in_budget(self) -> bool:
        return self.seconds <= self.budget

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.title}: {self.detail} ({self.seconds:.2f}s / {self.budget:g}s)"


LEVELS = {
    "quick": {"depth": 10, "paths": 500, "samples": 500, "g_samples": 2000},
    "full": {"depth": 16, "paths": 2000, "samples": 10_000, "g_samples": 10_000},
}

_B13 = ("1/3", "2/3")
_SFTS = ((1, ("00", "11")), (1, ("000", "111")), (2, ("00", "11", "22")))


def _timed(number: int, title: str, budget: float, fn) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as e:  # a crash is a failure of the criterion, reported as such
        ok, detail = False, f"raised {type(e).__name__}: {e}"
    return CriterionResult(number, title, bool(ok), detail, time.perf_counter() - t0, budget)


# ---------------------------------------------------------------------------
# brute-force oracles on words (no automata)


def _allowed(word: tuple, forbidden) -> bool:
    return not any(occurs(f, word) for f in forbidden)


def _left_extendable(word: tuple, forbidden, J: int, R: int) -> bool:
    if not _allowed(word, forbidden):
        return False
    if R == 0:
        return True
    return any(_left_extendable((a,) + word, forbidden, J, R - 1) for a in range(J + 1))


def brute_language(J: int, forbidden, n: int, R: int = 12) -> set:
    """Initial words (read order, last symbol x_0) of length n of the subshift."""
    fb = [tuple(int(c) for c in f) for f in forbidden]
    return {w for w in itertools.product(range(J + 1), repeat=n) if _left_extendable(w, fb, J, R)}


def brute_exit_language(J: int, forbidden, n: int, R: int = 12) -> set:
    """Initial words of length n of the exit set (equivalently of its closure)."""
    fb = [tuple(int(c) for c in f) for f in forbidden]
    M = max(len(f) for f in fb)
    out = set()
    for w in itertools.product(range(J + 1), repeat=n):
        for u in itertools.product(range(J + 1), repeat=M):
            v = u + w
            if _allowed(v, fb):
                continue
            if any(v[len(v) - len(f):] == f for f in fb) and _left_extendable(v[:-1], fb, J, R):
                out.add(w)
                break
    return out


def brute_rho(seq: SymbolSeq, J: int, forbidden, R: int = 12) -> Fraction:
    """rho(seq, K) from the longest tail word of seq that is an initial word of K."""
    fb = [tuple(int(c) for c in f) for f in forbidden]
    M = max(len(f) for f in fb)
    N = len(seq.suffix) + (M + 2) * len(seq.period) + M
    for n in range(1, N + 1):
        if not _left_extendable(seq.last(n), fb, J, R):
            return Fraction(1, 2 ** (n - 1))
    return Fraction(0)


# ---------------------------------------------------------------------------
# the criteria


def c1_example_4_1():
    B = Points(_B13)
    ex, bar = exit_and_barrier(B)
    p = builtin("cos3")
    v = invariance_check(p, B)
    zeros = [abs(float(p(Fraction(1, 6)))), abs(float(p(Fraction(5, 6)))), abs(p(1 / 6)), abs(p(5 / 6))]
    ok = ex == Points(["1/6", "5/6"]) and bar == Points(_B13) and v.passed and max(zeros) <= 1e-15
    return ok, f"B_e^c={ex}, B_b={bar}, invariance={v.passed}, max|p| at exits={max(zeros):.1e}"


def c2_example_4_2():
    B = Intervals([["0", "1/4", "closed-open"], ["3/4", "1", "closed"]])
    ex, _ = exit_and_barrier(B)
    want = Intervals([["3/8", "5/8", "closed-open"]])
    p = builtin("shannon")
    inv = invariance_check(p, B)
    ch = cohen_check(p, [(Fraction(-1, 2), Fraction(1, 2))], j_max=30)
    ok = ex == want and inv.passed and ch.passed and ch.inf == 1
    return ok, f"B_e^c={ex}, invariance={inv.passed}, cohen inf={ch.inf} at {ch.argmin}"


def c3_qmf_identity():
    worst_b = max(qmf_residual(builtin(n), 4096) for n in ("haar", "cos3", "shannon"))
    B13, B7 = Points(_B13), Points(["1/7", "2/7", "4/7"])
    built = [construct_thm_1(B13), construct_prop_4_2(B13), construct_thm_1(B7), construct_prop_4_2(B7)]
    worst_c = max(qmf_residual(p, 4096) for p in built)
    return worst_b <= 1e-12 and worst_c <= 1e-9, f"builtin {worst_b:.1e}, constructed ({len(built)}) {worst_c:.1e}"


def c4_viete(seed: int = 4):
    rng = random.Random(seed)
    p = builtin("haar")
    bad = 0
    for _ in range(128):
        x = Fraction(rng.randint(-4000, 4000), rng.randint(1, 500))
        b = phi_hat(p, x, 48)
        y = math.pi * float(x)
        truth = 1.0 if x == 0 else (math.sin(y) / y) ** 2
        if not (b.lower - 1e-8 <= truth <= b.upper + 1e-8 and b.upper - b.lower <= 1e-8):
            bad += 1
    sums = []
    for _ in range(20):
        q = rng.randint(2, 200)
        x0 = Fraction(rng.randint(0, q - 1), q)
        s = sum_phi_hat(p, x0, 512, 48)
        sums.append((s.lower, s.upper))
    # the top end is 1 up to float rounding of the partial products
    ok_sums = all(0.995 <= lo and hi <= 1.0 + 1e-12 for lo, hi in sums)
    lo = min(s[0] for s in sums)
    hi = max(s[1] for s in sums)
    return bad == 0 and ok_sums, f"{bad} bracket misses of 128; 20 sums within [{lo:.5f}, {hi:.12f}]"


def c5_constructed_filter():
    B = Points(_B13)
    p = construct_thm_1(B)
    step1 = p.verify_step1()
    s = sum_phi_hat(p, Fraction(1, 3), 64, 64)
    path = simulate(p, Fraction(1, 3), 40, seed=11).states
    cycle = all(x == (Fraction(1, 3) if t % 2 == 0 else Fraction(2, 3)) for t, x in enumerate(path))
    ok = all(step1.values()) and s.upper == 0 and s.all_exact_zero and cycle
    failed = [k for k, v in step1.items() if not v]
    return ok, f"step-1 failures {failed}, sum in [{s.lower}, {s.upper}] all exact zero {s.all_exact_zero}, 2-cycle {cycle}"


def c6_coding(seed: int = 6):
    rng = random.Random(seed)
    fails = 0
    for _ in range(1000):
        q = rng.randint(1, 1000)
        x0 = Fraction(rng.randint(0, q - 1), q)
        k = rng.randint(-64, 64)
        t = rng.randint(1, 40)
        if xi_t_of_k(x0, k, t) != recursion_state(x0, code_k(k, t)):
            fails += 1
    return fails == 0, f"{fails} mismatches of 1000"


def c7_lemma_4_4(depth: int = 16, samples: int = 10_000):
    rep = lemma_4_4_check(Points(_B13), Fraction(1, 4), exhaustive_depth=depth, n_samples=samples, sample_depth=40, seed=7)
    ok = rep.alpha == Fraction(1, 12) and rep.violations == 0
    return ok, f"alpha={rep.alpha}, {rep.violations} violations over {rep.nodes_checked} states (depth {depth}, {samples} paths), min ratio {rep.min_ratio}"


def c8_prop_2_2(depth: int = 12):
    notes = []
    ok = True
    for forb in (("00", "11"), ("000", "111")):
        K = SftSubshift(1, forb)
        rep = check_prop_2_2(K)
        closed = ExitSet(K).is_closed()
        Z = K.exit_closure()
        agree, disjoint_brute = True, False
        for n in range(1, depth + 1):
            lk, lz = brute_language(1, forb, n), brute_exit_language(1, forb, n)
            if lk != set(K.automaton.words(n)) or lz != set(Z.words(n)):
                agree = False
            disjoint_brute = disjoint_brute or not (lk & lz)
        this = rep.all_true and closed and agree and disjoint_brute
        ok &= this
        notes.append(f"{{{','.join(forb)}}}: closed={closed} disjoint={rep.disjoint_from_exit_closure} brute-agree={agree}")
    fam = example_3_1()
    dists = []
    for L in range(3, 13):
        w, d = find_exit_witness(fam, L)
        dists.append(d)
        ok &= w is not None and d <= Fraction(1, 2 ** (L - 2))
    ok &= all(a > b for a, b in zip(dists, dists[1:]))
    notes.append("generator family witness distances " + ", ".join(f"2^{int(math.log2(d))}" for d in dists))
    return ok, "; ".join(notes)


def c9_g_functions(depth: int = 12, n_samples: int = 10_000):
    ok = True
    notes = []
    for J, forb in _SFTS:
        K = SftSubshift(J, forb)
        g = construct_thm_1_2(K)
        res = g_sum_residual(g, sample_points(J, n_samples, seed=9))
        Z = g.Z
        zero_ok = all(g(Z.representative(w)) == 0 for w in Z.words(depth))
        for w in itertools.product(range(J + 1), repeat=depth):
            s = SymbolSeq((0,), w, J)
            if (g(s) == 0) != (s in Z):
                zero_ok = False
                break
        st = strict_g(K)
        pos = isinstance(st, StrictG) and st.lower_bound > 0
        kmin = min((g(K.automaton.representative(w)) for w in K.automaton.words(depth)), default=None)
        pos = pos and kmin is not None and kmin >= st.lower_bound
        ok &= res == 0 and zero_ok and pos
        notes.append(f"J={J} {{{','.join(forb)}}}: residual {res}, zero set ok {zero_ok}, lower bound {getattr(st, 'lower_bound', None)}")
    ref = strict_g(example_3_1(), 15)
    refused = isinstance(ref, Refusal) and ref.witness == SymbolSeq.parse("(01)*1", 1)
    ok &= refused
    notes.append(f"generator family @15 refused with witness {getattr(ref, 'witness', None)}")
    return ok, "; ".join(notes)


def c10_monte_carlo(paths: int = 2000):
    p = builtin("haar")
    est = absorption_estimate(p, Fraction(1, 3), paths, 2000, seed=10)
    s = sum_phi_hat(p, Fraction(1, 3), 512, 48)
    seq = [est.at(T).estimate for T in (500, 1000, 2000)]
    ok = ci_overlaps(est, s.lower, s.upper) and seq[0] <= seq[1] <= seq[2]
    return ok, f"estimate {est.estimate:.4f} CI [{est.ci_low:.4f}, {est.ci_high:.4f}] vs bracket [{s.lower:.5f}, {s.upper:.5f}]; T=500/1000/2000 -> {seq}"


def c11_oracle(depth: int = 12, n_points: int = 200):
    mism = 0
    total = 0
    for J, forb in _SFTS:
        K = SftSubshift(J, forb)
        M = max(len(f) for f in forb)
        # keep the brute oracle's window within the enumeration depth
        max_suffix = max(0, depth - M - 2)
        pts = sample_points(J, n_points, seed=11 + J, max_suffix=max_suffix, max_period=2)
        for s in pts:
            total += 1
            if rho_to_set(s, K) != brute_rho(s, J, forb, R=depth):
                mism += 1
    return mism == 0, f"{mism} mismatches of {total}"


CRITERIA = [
    (1, "cos3 exit and barrier sets of {1/3,2/3}", 1.0),
    (2, "Shannon half-open exit set and Cohen check", 1.0),
    (3, "QMF identity", 5.0),
    (4, "Haar product oracle", 30.0),
    (5, "constructed filter for {1/3,2/3}", 60.0),
    (6, "integer coding identity", 5.0),
    (7, "path bounds near {1/3,2/3}", 60.0),
    (8, "finite-type exit-set battery", 60.0),
    (9, "constructed g-functions", 60.0),
    (10, "Monte Carlo consistency", 120.0),
    (11, "distance oracle equivalence", 30.0),
]


def criterion_fn(number: int, level: str = "full"):
    lv = LEVELS[level]
    d = min(lv["depth"], 12)
    return {
        1: c1_example_4_1,
        2: c2_example_4_2,
        3: c3_qmf_identity,
        4: c4_viete,
        5: c5_constructed_filter,
        6: c6_coding,
        7: lambda: c7_lemma_4_4(lv["depth"], lv["samples"]),
        8: lambda: c8_prop_2_2(d),
        9: lambda: c9_g_functions(d, lv["g_samples"]),
        10: lambda: c10_monte_carlo(lv["paths"]),
        11: lambda: c11_oracle(d),
    }[number]


def run_criterion(number: int, level: str = "full") -> CriterionResult:
    _, title, budget = CRITERIA[number - 1]
    return _timed(number, title, budget, criterion_fn(number, level))


def run_all(level: str = "full", numbers=None) -> list[CriterionResult]:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {sorted(LEVELS)}")
    return [run_criterion(n, level) for n, _, _ in CRITERIA if numbers is None or n in numbers]


__all__ = ["CriterionResult", "run_all", "run_criterion", "brute_language", "brute_exit_language", "brute_rho"]
