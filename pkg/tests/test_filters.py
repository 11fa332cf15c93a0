import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qmfinv.filters import (
    ConstructedFilter,
    ConstructionError,
    TransitionFn,
    builtin,
    cohen_check,
    construct_prop_4_2,
    construct_thm_1,
    filter_from_dict,
    filter_to_dict,
    invariance_check,
    qmf_residual,
)
from qmfinv.intervals import Intervals, Points, SftBacked, exit_and_barrier
from qmfinv.subshift import SftSubshift

F = Fraction
B13 = Points(["1/3", "2/3"])


class Tampered(TransitionFn):
    """haar with a bump: breaks p(x) + p(x + 1/2) = 1."""

    name = "tampered"

    def _float(self, x):
        return math.cos(math.pi * x) ** 2 + (0.01 if 0.1 < x < 0.2 else 0.0)


@pytest.fixture(scope="module")
def thm1():
    return construct_thm_1(B13)


def test_builtin_values():
    haar, cos3, sh = builtin("haar"), builtin("cos3"), builtin("shannon")
    assert haar(0) == 1 and haar(F(1, 2)) == 0 and haar(F(1, 3)) == F(1, 4)
    assert cos3(F(1, 6)) == 0 and cos3(F(5, 6)) == 0
    assert sh(F(1, 8)) == 1 and sh(F(1, 2)) == 0 and sh(F(1, 4)) == 0 and sh(F(3, 4)) == 1
    assert abs(haar(0.3) - math.cos(0.3 * math.pi) ** 2) < 1e-15
    with pytest.raises(ValueError):
        builtin("db4")


def test_builtin_residuals():
    assert qmf_residual(builtin("haar")) <= 1e-12
    assert qmf_residual(builtin("cos3")) <= 1e-12
    assert qmf_residual(builtin("shannon")) == 0


def test_tampered_filter_residual_is_reported():
    assert qmf_residual(Tampered()) >= 0.009


def test_invariance_checks():
    assert invariance_check(builtin("cos3"), B13).passed
    v = invariance_check(builtin("haar"), B13)
    assert not v.passed and v.max_abs == pytest.approx(0.75)
    B = Intervals([["0", "1/4", "closed-open"], ["3/4", "1", "closed"]])
    assert invariance_check(builtin("shannon"), B).passed


def test_thm1_construction(thm1):
    p = thm1
    assert all(p.verify_step1().values())
    assert p(F(1, 6)) == 0 and p(F(5, 6)) == 0
    assert p(F(1, 3)) == 1 and p(F(2, 3)) == 1
    assert p(0) == 1 and p(F(1, 2)) == 0
    assert p(F(1, 32)) == 1
    assert qmf_residual(p) <= 1e-9
    assert invariance_check(p, B13).passed


@given(st.fractions(min_value=0, max_value=1, max_denominator=10**6))
def test_thm1_qmf_identity_exact(x):
    p = construct_thm_1(B13)
    y = x + F(1, 2) if x <= F(1, 2) else x - F(1, 2)
    assert p(x) + p(y) == 1 or abs(float(p(x)) + float(p(y)) - 1) < 1e-12


def test_thm1_three_cycle():
    B7 = Points(["1/7", "2/7", "4/7"])
    p = construct_thm_1(B7)
    assert all(p.verify_step1().values())
    for x in ("1/14", "9/14", "11/14"):
        assert p(F(x)) == 0
    assert qmf_residual(p) <= 1e-9


def test_prop_construction():
    p = construct_prop_4_2(B13)
    assert qmf_residual(p) <= 1e-9 and invariance_check(p, B13).passed
    q = construct_prop_4_2(Points(["0", "1"]))
    assert q(F(1, 2)) == 0 and qmf_residual(q) <= 1e-9


def test_sft_backed_construction():
    S = SftBacked(SftSubshift(1, ["00", "11"]))
    p = construct_thm_1(S)
    assert p(F(1, 6)) == 0 and qmf_residual(p) <= 1e-9


@pytest.mark.parametrize(
    "B, clause",
    [
        (Points(["1/3"]), "theta-invariance"),
        (Points(["0", "1"]), "interior"),
        (Intervals([["1/3", "1/2", "closed-open"]]), "closed"),
    ],
)
def test_thm1_refusals(B, clause):
    with pytest.raises(ConstructionError) as e:
        construct_thm_1(B)
    assert e.value.clause == clause


def test_epsilon_too_large_refused():
    with pytest.raises(ConstructionError):
        construct_thm_1(B13, eps=F(1, 3))


def test_cohen_verdicts():
    T = [(F(-1, 2), F(1, 2))]
    haar = cohen_check(builtin("haar"), T, 30)
    assert haar.passed and haar.inf == pytest.approx(0.5)
    cos3 = cohen_check(builtin("cos3"), T, 30)
    assert not cos3.passed and cos3.inf == 0
    # x = 1/2, j = 1 lands on 1/4 where the indicator vanishes
    sh = cohen_check(builtin("shannon"), T, 30)
    assert not sh.passed and sh.argmin == (F(1, 2), 1)
    gap = cohen_check(builtin("haar"), [(F(0), F(1, 2))], 10)
    assert not gap.covered and not gap.passed


def test_filter_json_round_trip(thm1):
    d = filter_to_dict(thm1)
    text = json.dumps(d, sort_keys=True)
    q = filter_from_dict(json.loads(text))
    assert isinstance(q, ConstructedFilter)
    assert json.dumps(filter_to_dict(q), sort_keys=True) == text
    for x in [F(i, 97) for i in range(98)]:
        assert q(x) == thm1(x)


def test_exit_set_of_sft_backed_closure():
    ex, bar = exit_and_barrier(SftBacked(SftSubshift(1, ["00", "11"])))
    assert ex.contains(F(1, 6)) and ex.contains(F(5, 6))
    assert bar.contains(F(1, 3))
