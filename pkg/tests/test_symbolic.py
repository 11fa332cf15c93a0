from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qmfinv.intervals import star_interval, tau
from qmfinv.symbolic import SymbolSeq, agreement, format_word, parse_word, rho, shift, star

from strategies import points

P = SymbolSeq.parse


def test_parse_and_format_round_trip():
    s = P("(01)*1", 1)
    assert s.period == (0, 1) and s.suffix == (1,)
    assert s.x0 == 1
    assert str(s) == "(01)*1"
    assert parse_word("0110") == (0, 1, 1, 0) and format_word((2, 0)) == "20"


def test_canonical_form_identifies_equal_sequences():
    assert P("(01)*01", 1) == P("(01)*", 1)
    assert P("(0101)*", 1) == P("(01)*", 1)
    assert P("(012)*011", 2) == P("(201)*1", 2)
    assert P("(01)*1", 1) != P("(10)*1", 1)


def test_symbol_out_of_alphabet_rejected():
    with pytest.raises(ValueError):
        SymbolSeq((0, 2), (), 1)


def test_shift_drops_last_symbol():
    assert shift(P("(01)*1", 1)) == P("(01)*", 1)
    assert shift(P("(01)*", 1)) == P("(10)*", 1)


def test_star_changes_last_symbol_mod_alphabet():
    assert star(P("(01)*", 1)) == P("(10)*0", 1)
    assert star(P("(0)*2", 2), 1) == P("(0)*", 2)
    assert star(P("(0)*", 2), -1) == P("(0)*2", 2)


def test_rho_values():
    assert rho(P("(01)*", 1), P("(01)*", 1)) == 0
    assert rho(P("(01)*", 1), P("(10)*", 1)) == 1
    assert rho(P("(01)*1", 1), P("(10)*1", 1)) == Fraction(1, 2)


def test_tau_examples():
    assert tau(P("(10)*", 1)) == Fraction(1, 3)
    assert tau(P("(10)*0", 1)) == Fraction(1, 6)
    assert tau(P("(0)*1", 1)) == Fraction(1, 2)
    assert tau(P("(1)*", 1)) == 1


@given(points(2), st.integers(-3, 3))
def test_star_inverse(s, j):
    assert star(star(s, j), -j) == s


@given(points(2), st.integers(0, 2))
def test_shift_after_append(s, a):
    assert shift(s.append(a)) == s
    assert s.append(a).x0 == a


@given(points(1), points(1), points(1))
def test_rho_is_an_ultrametric(a, b, c):
    assert rho(a, b) == rho(b, a)
    assert (rho(a, b) == 0) == (a == b)
    assert rho(a, c) <= max(rho(a, b), rho(b, c))


@given(points(1), points(1))
def test_rho_matches_agreement(a, b):
    n = agreement(a, b)
    if n is None:
        assert a == b
    else:
        assert a.last(n) == b.last(n) and a.last(n + 1) != b.last(n + 1)
        assert rho(a, b) == Fraction(1, 2**n)


@given(points(1))
def test_tau_commutes_with_star_away_from_zero(s):
    x = tau(s)
    if 0 < x <= 1:
        assert tau(star(s)) == star_interval(x) or tau(star(s)) in (0, 1)


@given(points(1))
def test_tau_of_append(s):
    assert tau(s.append(0)) == tau(s) / 2
    assert tau(s.append(1)) == tau(s) / 2 + Fraction(1, 2)
