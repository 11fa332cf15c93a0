"""The infinite product Phi_p, the coding of integers by digit sequences, and the
sum of Phi_p over the integer translates of a point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .filters import TransitionFn
from .intervals import as_rational
from .symbolic import Word


@dataclass(frozen=True)
class ProductBracket:
    lower: float
    upper: float
    terms_used: int
    exact_zero: bool = False

    def contains(self, v: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= v <= self.upper + tol


def code_k(k: int, length: int) -> Word:
    """First ``length`` digits x_1, x_2, ... coding the integer k.

    k >= 0: binary digits of k, least significant first, then zeros.
    k < 0: digits with -k-1 = sum (1 - x_i) 2^(i-1), so the tail is all ones.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if k >= 0:
        return tuple((k >> i) & 1 for i in range(length))
    m = -k - 1
    return tuple(1 - ((m >> i) & 1) for i in range(length))


def xi_t_of_k(x0, k: int, t: int) -> Fraction:
    """((x0 + k) / 2^t) mod 1, exactly."""
    if t < 0:
        raise ValueError("t must be >= 0")
    v = (as_rational(x0) + k) / 2**t
    return v - math.floor(v)


def recursion_state(x0, digits: Word) -> Fraction:
    """xi_t from xi_{t-1}/2 + x_t/2, t = 1..len(digits)."""
    xi = as_rational(x0)
    for d in digits:
        xi = xi / 2 + Fraction(d, 2)
    return xi


def phi_hat(p: TransitionFn, x, t_max: int = 48) -> ProductBracket:
    """Bracket on prod_{j>=1} p(x / 2^j).

    ``upper`` is the partial product over j <= t_max (every factor is <= 1).
    ``lower`` equals ``upper`` times a certified bound on the omitted factors:
    1 when x/2^j stays where p is identically 1, or 1 - c x^2 4^(-t_max) / 3
    when p(y) >= 1 - c y^2; otherwise 0.  Both ends are widened by the float
    rounding of the factors and of the product (8 ulp per factor).
    """
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    x = as_rational(x)
    x0 = x - math.floor(x)
    k = math.floor(x)
    prod = 1.0
    for j in range(1, t_max + 1):
        v = p(xi_t_of_k(x0, k, j))
        if v == 0:
            return ProductBracket(0.0, 0.0, j, True)
        prod *= float(v)
    slack = t_max * 2.0**-50
    lo, hi = prod * (1.0 - slack), min(1.0, prod * (1.0 + slack))
    h = abs(x) / 2 ** (t_max + 1)
    r = p.flat_radius()
    if h < r:
        return ProductBracket(lo, hi, t_max)
    c = p.quad_constant()
    if c is not None and h <= Fraction(1, 2):
        tail = 1.0 - c * float(x) ** 2 * 4.0 ** (-t_max) / 3.0
        if tail > 0:
            return ProductBracket(lo * tail, hi, t_max)
    return ProductBracket(0.0, hi, t_max)


@dataclass
class SumBracket:
    lower: float
    upper: float
    terms: dict
    largest_omitted_upper: float
    all_exact_zero: bool

    @property
    def exact_zero(self) -> bool:
        return self.all_exact_zero


def sum_phi_hat(p: TransitionFn, x0, k_max: int = 512, t_max: int = 48) -> SumBracket:
    """Sum of phi_hat(x0 + k) over |k| <= k_max, summed in increasing k."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    x0 = as_rational(x0)
    terms = {k: phi_hat(p, x0 + k, t_max) for k in range(-k_max, k_max + 1)}
    lo = math.fsum(b.lower for b in terms.values())
    hi = math.fsum(b.upper for b in terms.values())
    omitted = max(phi_hat(p, x0 + k_max + 1, t_max).upper, phi_hat(p, x0 - k_max - 1, t_max).upper)
    return SumBracket(lo, hi, terms, omitted, all(b.exact_zero for b in terms.values()))
