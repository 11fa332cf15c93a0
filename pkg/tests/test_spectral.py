import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qmfinv.filters import builtin, construct_thm_1
from qmfinv.intervals import Points
from qmfinv.spectral import code_k, phi_hat, recursion_state, sum_phi_hat, xi_t_of_k

F = Fraction


def sinc2(x: float) -> float:
    return 1.0 if x == 0 else (math.sin(math.pi * x) / (math.pi * x)) ** 2


def test_code_k():
    assert code_k(5, 4) == (1, 0, 1, 0)
    assert code_k(0, 3) == (0, 0, 0)
    assert code_k(-1, 3) == (1, 1, 1)
    assert code_k(-2, 3) == (0, 1, 1)
    with pytest.raises(ValueError):
        code_k(1, 0)


@given(
    st.fractions(min_value=0, max_value=1, max_denominator=1000).filter(lambda x: x < 1),
    st.integers(-64, 64),
    st.integers(1, 40),
)
def test_coding_identity(x0, k, t):
    assert xi_t_of_k(x0, k, t) == recursion_state(x0, code_k(k, t))


def test_haar_product_at_half():
    b = phi_hat(builtin("haar"), F(1, 2))
    assert b.lower <= (2 / math.pi) ** 2 <= b.upper
    assert b.upper - b.lower < 1e-12


@given(st.fractions(min_value=-20, max_value=20, max_denominator=300))
def test_haar_brackets_sinc(x):
    b = phi_hat(builtin("haar"), x, 48)
    assert b.lower - 1e-12 <= sinc2(float(x)) <= b.upper + 1e-12


def test_exact_zero_at_integers():
    b = phi_hat(builtin("haar"), 3)
    assert b.exact_zero and b.upper == 0


def test_haar_sum_close_to_one():
    s = sum_phi_hat(builtin("haar"), F(1, 3), 512)
    assert 0.995 <= s.lower <= s.upper <= 1.0 + 1e-12
    assert s.largest_omitted_upper < 1e-5


def test_constructed_sum_vanishes_exactly():
    p = construct_thm_1(Points(["1/3", "2/3"]))
    s = sum_phi_hat(p, F(1, 3), 64, 64)
    assert s.upper == 0 and s.all_exact_zero
