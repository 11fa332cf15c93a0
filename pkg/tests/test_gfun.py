import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given

from qmfinv.filters import builtin, construct_thm_1
from qmfinv.gfun import (
    ConstructedG,
    GConstructionError,
    GFunction,
    Refusal,
    StrictG,
    construct_thm_1_2,
    exit_cylinders,
    g_from_dict,
    g_invariance_check,
    g_sum_residual,
    g_to_dict,
    general_subset_invariance,
    lift,
    sample_points,
    strict_g,
)
from qmfinv.intervals import Points
from qmfinv.subshift import CylinderUnion, SftSubshift, example_3_1
from qmfinv.symbolic import SymbolSeq, rho, shift

from strategies import points

F = Fraction
P = SymbolSeq.parse
K0011 = SftSubshift(1, ["00", "11"])
K000 = SftSubshift(1, ["000", "111"])
K3 = SftSubshift(2, ["00", "11", "22"])


class Defective(GFunction):
    J = 1

    def __call__(self, seq):
        return F(1, 2) if seq.x0 == 0 else F(1, 3)


def test_lift_values():
    assert lift(builtin("haar"))(P("(0)*", 1)) == 1
    assert lift(builtin("cos3"))(P("(10)*0", 1)) == 0
    assert lift(builtin("shannon"))(P("(0)*1", 1)) == 0


def test_lifted_residual_small():
    for name in ("haar", "cos3", "shannon"):
        assert g_sum_residual(lift(builtin(name)), sample_points(1, 2000, seed=1)) <= 1e-12


def test_defective_residual_reported():
    assert g_sum_residual(Defective(), sample_points(1, 10)) == F(1, 6)


def test_constructed_values_on_alternating_shift():
    g = construct_thm_1_2(K0011)
    assert g(P("(01)*1", 1)) == 0 and g(P("(10)*0", 1)) == 0
    assert g(P("(01)*", 1)) == 1 and g(P("(10)*", 1)) == 1


@pytest.mark.parametrize("K", [K0011, K000, K3, SftSubshift(1, ["010"])])
def test_constructed_sum_exact(K):
    g = construct_thm_1_2(K)
    assert g_sum_residual(g, sample_points(K.J, 1000, seed=2)) == 0


@pytest.mark.parametrize("K", [K0011, K000, K3])
def test_zero_set_is_exit_closure(K):
    g = construct_thm_1_2(K)
    Z = g.Z
    for w in itertools.product(range(K.J + 1), repeat=8):
        for tail in range(K.J + 1):
            s = SymbolSeq((tail,), w, K.J)
            assert (g(s) == 0) == (s in Z)
    for w in Z.words(10):
        assert g(Z.representative(w)) == 0


def test_j2_default_value_off_cells():
    assert construct_thm_1_2(K3).default == F(1, 3)
    # here some depth-m sibling classes miss the exit closure entirely
    g = construct_thm_1_2(SftSubshift(2, ["022", "121", "220"]))
    vals = {g(s) for s in sample_points(2, 500, seed=3)}
    assert F(1, 3) in vals
    assert all(0 <= v <= 1 for v in vals)
    assert g_sum_residual(g, sample_points(2, 500, seed=5)) == 0


@given(points(1, 8, 4), points(1, 8, 4))
def test_modulus_within_cells(a, b):
    g = construct_thm_1_2(K000)
    if a.last(g.m) != b.last(g.m):
        return
    A = g._A(a.last(g.m)[:-1])
    bound = rho(a, b) / g.J if a.x0 in A else rho(a, b)
    assert abs(g(a) - g(b)) <= bound


@given(points(2, 6, 3), points(2, 6, 3))
def test_modulus_within_cells_j2(a, b):
    g = construct_thm_1_2(K3)
    if a.last(g.m) != b.last(g.m):
        return
    assert abs(g(a) - g(b)) <= rho(a, b)


def test_refusal_when_star_images_meet():
    with pytest.raises(GConstructionError) as e:
        construct_thm_1_2(SftSubshift(2, ["00", "01", "02"]))
    assert e.value.witness is not None


def test_invariance_checks():
    assert g_invariance_check(lift(builtin("cos3")), K0011).passed
    v = g_invariance_check(lift(builtin("haar")), K0011)
    assert not v.passed and v.worst == pytest.approx(0.75)
    assert g_invariance_check(construct_thm_1_2(K0011), K0011).passed


def test_lift_of_constructed_filter_leaves_preimage_invariant():
    p = construct_thm_1(Points(["1/3", "2/3"]))
    assert g_invariance_check(lift(p), K0011).passed


@pytest.mark.parametrize("K", [K0011, K000, K3])
def test_strict_g(K):
    st = strict_g(K)
    assert isinstance(st, StrictG) and st.lower_bound > 0
    for w in K.automaton.words(10):
        assert st.g(K.automaton.representative(w)) >= st.lower_bound


def test_strict_g_refuses_generator_family():
    ref = strict_g(example_3_1(), 15)
    assert isinstance(ref, Refusal) and not ref
    assert ref.witness == P("(01)*1", 1)


def test_general_subset_cylinder():
    E = CylinderUnion(["0"], 1)
    ex = exit_cylinders(E)
    assert set(ex.expand(2)) == {(0, 1)}
    v = general_subset_invariance(E)
    assert v.exit_words == ("01",) and v.continuous_g_exists


def test_general_subset_whole_space():
    v = general_subset_invariance(CylinderUnion(["0", "1"], 1), lift(builtin("haar")))
    assert v.exit_words == () and v.g_vanishes and v.continuous_g_exists


def test_general_subset_existence_fails():
    assert general_subset_invariance(CylinderUnion(["00"], 1)).continuous_g_exists
    # both last-symbol variants of a point ending in 10 leave C(10)
    E = CylinderUnion(["10"], 1)
    v = general_subset_invariance(E)
    assert set(v.exit_words) == {"100", "101"}
    assert not v.continuous_g_exists
    zeta = shift(v.witness)
    assert zeta in E and zeta.append(0) not in E and zeta.append(1) not in E


@pytest.mark.parametrize("K", [K0011, K3])
def test_g_json_round_trip(K):
    g = construct_thm_1_2(K)
    text = json.dumps(g_to_dict(g), sort_keys=True)
    h = g_from_dict(json.loads(text))
    assert isinstance(h, ConstructedG)
    assert json.dumps(g_to_dict(h), sort_keys=True) == text
    for s in sample_points(K.J, 200, seed=4):
        assert g(s) == h(s)


def test_lifted_json_round_trip():
    g = lift(builtin("cos3"))
    h = g_from_dict(json.loads(json.dumps(g_to_dict(g))))
    assert h(P("(10)*0", 1)) == 0
