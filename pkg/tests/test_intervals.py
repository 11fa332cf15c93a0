from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qmfinv.intervals import (
    FULL,
    Interval,
    IntervalSet,
    Intervals,
    Points,
    SftBacked,
    as_rational,
    binary_reps,
    check_lemma_4_3,
    doubling,
    exit_and_barrier,
    is_binary_rational,
    is_theta_invariant,
    set_from_dict,
    set_to_dict,
    star_interval,
    tau,
)
from qmfinv.subshift import SftSubshift

F = Fraction
rationals = st.fractions(min_value=0, max_value=1, max_denominator=64)


def test_as_rational_rejects_nothing_silently():
    assert as_rational("1/3") == F(1, 3)
    assert as_rational(0.25) == F(1, 4)
    assert as_rational(0.1) == F(1, 10)  # via repr, not the binary expansion


def test_star_interval_convention():
    assert star_interval(0) == F(1, 2)
    assert star_interval(F(1, 2)) == 1
    assert star_interval(1) == F(1, 2)
    assert star_interval(F(3, 4)) == F(1, 4)


def test_doubling():
    assert doubling(F(2, 3)) == F(1, 3)
    assert doubling(F(1, 2)) == 0
    with pytest.raises(ValueError):
        doubling(F(3, 2))


def test_binary_reps():
    assert len(binary_reps(F(1, 2))) == 2
    assert all(tau(s) == F(1, 2) for s in binary_reps(F(1, 2)))
    assert [tau(s) for s in binary_reps(F(1, 3))] == [F(1, 3)]
    assert is_binary_rational(F(3, 8)) and not is_binary_rational(F(1, 3))


def test_half_open_flags_survive_algebra():
    A = Intervals([["0", "1/2", "closed-open"]])
    assert F(1, 2) not in A and 0 in A
    assert not A.is_closed()
    assert A.closure() == Intervals([["0", "1/2", "closed"]])
    assert A.complement() == Intervals([["1/2", "1", "closed"]])
    assert A.union(Points(["1/2"])) == Intervals([["0", "1/2", "closed"]])


def test_example_sets():
    ex, bar = exit_and_barrier(Points(["1/3", "2/3"]))
    assert ex == Points(["1/6", "5/6"]) and bar == Points(["1/3", "2/3"])
    B = Intervals([["0", "1/4", "closed-open"], ["3/4", "1", "closed"]])
    ex, bar = exit_and_barrier(B)
    assert ex == Intervals([["3/8", "5/8", "closed-open"]])
    assert bar == ex.star()
    ex, _ = exit_and_barrier(Points(["0", "1"]))
    assert ex == Points(["1/2"])


def test_theta_invariance():
    assert is_theta_invariant(Points(["1/3", "2/3"]))
    assert is_theta_invariant(Points(["1/7", "2/7", "4/7"]))
    assert not is_theta_invariant(Points(["1/3"]))


def test_separation_report():
    rep = check_lemma_4_3(Points(["1/3", "2/3"]))
    assert rep.theta_invariant and rep.no_binary_rationals and rep.disjointness
    assert rep.delta == F(1, 6)
    assert check_lemma_4_3(Points(["1/7", "2/7", "4/7"])).delta == F(1, 14)


def test_sft_backed_equals_finite_orbit():
    S = SftBacked(SftSubshift(1, ["00", "11"]))
    assert S.dist(F(1, 4)) == F(1, 12)
    assert S.contains(F(1, 3)) and not S.contains(F(1, 2))
    assert S.dist(F(1, 2)) == F(1, 6)


def test_sft_backed_distance_brackets_brute_force():
    K = SftSubshift(1, ["000", "111"])
    S = SftBacked(K)
    pts = [tau(K.automaton.representative(w)) for w in K.automaton.words(14)]
    for x in [F(i, 37) for i in range(38)]:
        lo, hi = S.dist_bounds(x)
        brute = min(abs(x - p) for p in pts)
        assert lo <= brute + F(1, 2**13) and hi <= brute


@given(rationals, rationals)
def test_interval_contains_consistent_with_complement(a, b):
    lo, hi = min(a, b), max(a, b)
    S = IntervalSet([Interval(lo, hi, True, False)]) if lo < hi else Points([lo])
    for x in (lo, hi, (lo + hi) / 2):
        assert (x in S) != (x in S.complement())


@given(st.lists(rationals, min_size=1, max_size=5), rationals)
def test_point_distance(xs, y):
    assert Points(xs).dist(y) == min(abs(y - x) for x in xs)


def test_star_is_involution_away_from_endpoints():
    S = Intervals([["1/8", "3/8", "closed-open"]])
    assert S.star().star() == S


@pytest.mark.parametrize(
    "S",
    [
        Points(["1/3", "2/3"]),
        Intervals([["3/8", "5/8", "closed-open"]]),
        SftBacked(SftSubshift(1, ["00", "11"])),
    ],
)
def test_set_serialization_round_trip(S):
    T = set_from_dict(set_to_dict(S))
    assert set_to_dict(T) == set_to_dict(S)


def test_full_interval():
    assert 0 in FULL and 1 in FULL and FULL.is_closed()
