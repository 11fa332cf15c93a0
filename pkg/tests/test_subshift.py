import itertools
from fractions import Fraction

import pytest
from hypothesis import given

from qmfinv.acceptance import brute_exit_language, brute_language, brute_rho
from qmfinv.subshift import (
    BarrierSet,
    CylinderUnion,
    ExitSet,
    SftSubshift,
    check_prop_2_2,
    condition_thm_1_2,
    example_3_1,
    find_exit_witness,
    rho_to_set,
)
from qmfinv.symbolic import SymbolSeq, occurs, shift, star

from strategies import points

P = SymbolSeq.parse
K0011 = SftSubshift(1, ["00", "11"])


def test_membership():
    assert P("(01)*", 1) in K0011
    assert P("(10)*", 1) in K0011
    assert P("(01)*1", 1) not in K0011
    assert P("(0)*", 1) not in K0011


def test_forbidden_words_reduced():
    K = SftSubshift(1, ["00", "000", "11"])
    assert K.forbidden == frozenset({(0, 0), (1, 1)})


def test_exit_points_of_alternating_shift():
    ex = ExitSet(K0011)
    assert P("(10)*0", 1) in ex and P("(01)*1", 1) in ex
    assert set(map(str, ex.points(10))) == {"(10)*0", "(01)*1"}
    assert ex.is_closed()


def test_exit_point_of_triple_shift():
    ex = ExitSet(SftSubshift(1, ["000", "111"]))
    assert P("(01)*000", 1) in ex
    assert P("(01)*00", 1) not in ex  # still inside the subshift


def test_rho_to_set_values():
    assert rho_to_set(P("(01)*1", 1), K0011) == Fraction(1, 2)
    assert rho_to_set(P("(0)*", 1), K0011) == Fraction(1, 2)
    assert rho_to_set(P("(01)*", 1), K0011) == 0


def test_barrier_for_binary_alphabet_is_star_of_exit():
    bar = BarrierSet(K0011)
    assert P("(01)*", 1) in bar and P("(10)*", 1) in bar


def test_barrier_empty_for_three_symbols():
    assert BarrierSet(SftSubshift(2, ["00", "11", "22"])).is_empty()


def test_condition_holds_and_fails():
    assert condition_thm_1_2(K0011).holds
    res = condition_thm_1_2(SftSubshift(2, ["00", "01", "02"]))
    assert not res.holds
    K = SftSubshift(2, ["00", "01", "02"])
    # every last-symbol variant of the witness is an exit point
    for j in range(3):
        v = star(res.witness, j)
        assert v not in K and shift(v) in K


@pytest.mark.parametrize("forb", [("00", "11"), ("000", "111"), ("010",)])
def test_automaton_languages_match_brute_force(forb):
    K = SftSubshift(1, forb)
    Z = K.exit_closure()
    for n in range(1, 9):
        assert set(K.automaton.words(n)) == brute_language(1, forb, n)
        assert set(Z.words(n)) == brute_exit_language(1, forb, n)


@given(points(2, max_suffix=6, max_period=3))
def test_rho_to_set_matches_brute_force_j2(s):
    forb = ("00", "11", "22")
    assert rho_to_set(s, SftSubshift(2, forb)) == brute_rho(s, 2, forb)


@given(points(1, max_suffix=6, max_period=3))
def test_rho_to_set_matches_brute_force_nonsymmetric(s):
    forb = ("010", "0110")
    assert rho_to_set(s, SftSubshift(1, forb)) == brute_rho(s, 1, forb)


def test_shift_onto():
    assert K0011.shift_is_onto()
    assert not SftSubshift(2, ["00", "01", "02"]).shift_is_onto()


def test_prop_2_2_for_sft():
    rep = check_prop_2_2(SftSubshift(1, ["000", "111"]))
    assert rep.all_true


def test_generator_family_words():
    fam = example_3_1()
    w3 = fam.words(3)
    assert (0, 0, 0, 0) in w3 and (1, 1, 1, 1) in w3
    assert (0, 0, 1, 0, 1, 0, 1, 0, 0) in w3
    assert fam.contains(P("(01)*1", 1))


def test_generator_family_witness_decreases():
    fam = example_3_1()
    last = None
    for L in range(3, 9):
        w, d = find_exit_witness(fam, L)
        assert w == P("(01)*1", 1)
        assert d <= Fraction(1, 2 ** (L - 2))
        assert last is None or d < last
        last = d
    rep = check_prop_2_2(fam, 6)
    assert not rep.all_true and rep.witness == P("(01)*1", 1)


def test_cylinder_union_algebra():
    E = CylinderUnion(["0"], 1)
    assert P("(1)*0", 1) in E and P("(0)*1", 1) not in E
    pre = E.preimage()
    assert P("(1)*01", 1) in pre
    assert set(E.complement().expand(2)) == {(0, 1), (1, 1)}
    ex = pre.intersect(E.complement())
    assert set(ex.expand(2)) == {(0, 1)}


def test_window_membership_agrees_with_automaton():
    K = SftSubshift(1, ["010", "0110"])
    for q in range(1, 4):
        for per in itertools.product((0, 1), repeat=q):
            for suf in itertools.product((0, 1), repeat=3):
                s = SymbolSeq(per, suf, 1)
                word = s.expanded(6)
                brute = not any(occurs(f, word) for f in K.forbidden)
                assert K.contains(s) == brute == (s in K.automaton)
