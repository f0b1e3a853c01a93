from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bessellab.polynomials import Laurent2, Poly, format_poly

coef = st.fractions(min_value=-20, max_value=20, max_denominator=12)
polys = st.lists(coef, max_size=6).map(Poly)
nonzero_polys = polys.filter(lambda p: not p.is_zero())


@settings(max_examples=80, deadline=None)
@given(polys, polys, polys)
def test_ring_laws(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a
    assert a - a == Poly()


@settings(max_examples=80, deadline=None)
@given(polys, nonzero_polys)
def test_divmod_reconstructs(a, b):
    q, r = a.divmod(b)
    assert q * b + r == a
    assert r.is_zero() or r.degree < b.degree


@settings(max_examples=60, deadline=None)
@given(polys, polys, coef)
def test_evaluation_is_a_homomorphism(a, b, x):
    assert (a * b)(x) == a(x) * b(x)
    assert (a + b)(x) == a(x) + b(x)


@settings(max_examples=60, deadline=None)
@given(polys, polys)
def test_leibniz(a, b):
    assert (a * b).deriv() == a.deriv() * b + a * b.deriv()


def test_gcd_and_exact_division():
    a = Poly.from_roots([1, 4, Fraction(1, 3)])
    b = Poly.from_roots([4, 9, Fraction(1, 3)])
    assert a.gcd(b) == Poly.from_roots([4, Fraction(1, 3)])
    assert (a * b).exact_div(b) == a
    with pytest.raises(ArithmeticError):
        a.exact_div(Poly([0, 1]))


def test_trailing_zeros_stripped_and_constants():
    p = Poly([1, 2, 0, 0])
    assert p.degree == 1
    assert Poly().is_zero()
    assert Poly.const(3) == 3
    assert Poly.monomial(2, 5).coeff(2) == 5
    assert p.coeff(7) == 0


def test_format():
    assert format_poly(Poly([64, -20, 1], "u")) == "u^2 - 20*u + 64"
    assert format_poly(Poly([0, Fraction(-1, 2)], "u")) == "-1/2*u"
    assert format_poly(Poly()) == "0"


def test_integrality():
    assert Poly([1, 2, 3]).is_integral()
    assert not Poly([Fraction(1, 2)]).is_integral()
    assert Poly([2, 4]).monic() == Poly([Fraction(1, 2), 1])


def test_laurent_derivatives():
    # d/dt (t^{1/2} v^3 + 2 t^{-1}) = 1/2 t^{-1/2} v^3 - 2 t^{-2}
    f = Laurent2({(Fraction(1, 2), 3): 1, (-1, 0): 2})
    assert f.d_dt() == Laurent2({(Fraction(-1, 2), 3): Fraction(1, 2), (-2, 0): -2})
    assert f.d_dv() == Laurent2({(Fraction(1, 2), 2): 3})
    assert (f - f).is_zero()
    assert f.shift(t_pow=1, v_pow=-3) == Laurent2({(Fraction(3, 2), 0): 1, (0, -3): 2})
