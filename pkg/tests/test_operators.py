import math
import warnings
from fractions import Fraction

import mpmath
import pytest

from bessellab.determinants import mu_columns, nu_columns
from bessellab.moments import Family, MomentSpec
from bessellab.operators import (
    MAX_VANHOVE_ORDER,
    Basis,
    DiffOperator,
    KernelProduct,
    apply_vanhove_numeric,
    bmw_symmetric_power,
    derive_vanhove,
    format_operator,
    formal_adjoint,
    leading_poly_for_order,
    mathfrak_poly,
    subleading_structure_holds,
)
from bessellab.polynomials import Poly


def test_bmw_first_power_is_the_bessel_operator():
    op = bmw_symmetric_power(1)
    assert op.basis is Basis.THETA
    assert op.coeffs == (Poly([0, 0, -1], "t"), Poly([], "t"), Poly([1], "t"))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("family", ["I", "K"])
def test_bmw_annihilates_kernel_powers_exactly(n, family):
    out = KernelProduct.power(family, n).apply(bmw_symmetric_power(n))
    assert out.terms == ()


@pytest.mark.parametrize("a, b", [(1, 2), (2, 2), (3, 1)])
def test_bmw_annihilates_mixed_products_numerically(a, b):
    # independent mpmath derivatives of I0^a K0^b
    n = a + b
    op = bmw_symmetric_power(n).to_plain()
    mpmath.mp.dps = 40
    f = lambda t: mpmath.besseli(0, t) ** a * mpmath.besselk(0, t) ** b  # noqa: E731
    t0 = mpmath.mpf("1.3")
    derivs = list(mpmath.diffs(f, t0, op.order))
    coefs = [mpmath.mpf(c.numerator) / c.denominator for c in (p(Fraction(13, 10)) for p in op.coeffs)]
    total = sum(c * d for c, d in zip(coefs, derivs))
    scale = sum(abs(c * d) for c, d in zip(coefs, derivs))
    assert abs(total) < 1e-25 * scale


@pytest.mark.parametrize("n", [2, 3, 4])
def test_formal_adjoint_is_an_involution(n):
    op = bmw_symmetric_power(n).to_plain()
    assert formal_adjoint(formal_adjoint(op)) == op


def test_theta_plain_roundtrip():
    op = bmw_symmetric_power(3)
    assert op.to_plain().to_theta() == op


def test_mathfrak_polynomials():
    assert mathfrak_poly("m", 1) == Poly.from_roots([0, 4], "u")
    assert mathfrak_poly("n", 1) == Poly.from_roots([0, 1, 9], "u")
    assert leading_poly_for_order(3) == Poly.from_roots([0, 0, 4, 16], "u")
    assert leading_poly_for_order(4) == Poly.from_roots([0, 0, 1, 9, 25], "u")
    with pytest.raises(ValueError):
        mathfrak_poly("x", 1)


@pytest.mark.parametrize("n", range(1, MAX_VANHOVE_ORDER + 1))
def test_vanhove_structure(n):
    pair = derive_vanhove(n)
    assert pair.operator.order == n
    assert pair.leading_poly == leading_poly_for_order(n)
    assert all(p.is_integral() for p in pair.operator.coeffs)
    assert subleading_structure_holds(n)


def test_vanhove_order_limits():
    with pytest.raises(ValueError):
        derive_vanhove(0)
    with pytest.raises(ValueError):
        derive_vanhove(MAX_VANHOVE_ORDER + 1)


def _homogeneous_columns(n):
    return mu_columns((n + 1) // 2) if n % 2 else nu_columns(n // 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("u", [0.5, 2.0])
def test_vanhove_annihilates_homogeneous_moments(n, u, fresh_cache):
    pair = derive_vanhove(n)
    for col in _homogeneous_columns(n):
        target = [(c, MomentSpec(f, a, b, 1, u)) for c, f, a, b in col]
        if any(s.decay_exponent < 0.05 for _, s in target):
            continue
        scale = max(abs(float(p(u))) for p in pair.operator.coeffs)
        assert abs(apply_vanhove_numeric(pair, target, u)) < 1e-8 * scale


@pytest.mark.parametrize("n", [2, 3, 4])
def test_vanhove_inhomogeneities(n, fresh_cache):
    pair = derive_vanhove(n)
    u = 0.5
    iv = apply_vanhove_numeric(pair, MomentSpec(Family.IV, 1, n + 1, 1, u), u)
    kv = apply_vanhove_numeric(pair, MomentSpec(Family.KV, 1, n + 1, 1, u), u)
    vac = apply_vanhove_numeric(pair, "checked-vacuum", u)
    assert iv == pytest.approx(-math.factorial(n + 1) / 2**n, rel=1e-7)
    assert kv == pytest.approx(math.factorial(n) / 2**n, rel=1e-7)
    assert vac == pytest.approx(math.factorial(n + 1) / 2 ** (n + 1) * math.log(u), rel=1e-7)


def test_warns_near_singular_point(fresh_cache):
    pair = derive_vanhove(3)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        apply_vanhove_numeric(pair, MomentSpec(Family.KV, 1, 4, 1, 4.001), 4.001)
    assert any("singular point" in str(w.message) for w in caught)


def test_rejects_plain_targets():
    with pytest.raises(ValueError):
        apply_vanhove_numeric(derive_vanhove(2), MomentSpec.plain(1, 3, 1), 0.5)
    with pytest.raises(ValueError):
        apply_vanhove_numeric(derive_vanhove(2), "nonsense", 0.5)


def test_format_operator():
    op = DiffOperator("u", Basis.PLAIN, (Poly([-3, 1], "u"), Poly([9, -20, 3], "u"), Poly([0, 9, -10, 1], "u")))
    assert format_operator(op) == "(u^3 - 10*u^2 + 9*u)*D^2 + (3*u^2 - 20*u + 9)*D + u - 3"


def test_spec_examples(fresh_cache):
    assert mathfrak_poly("m", 2) == Poly.from_roots([0, 0, 4, 16], "u")
    assert mathfrak_poly("n", 2) == Poly.from_roots([0, 0, 1, 9, 25], "u")
    assert apply_vanhove_numeric(derive_vanhove(1), MomentSpec(Family.IV, 1, 2, 1, 0.5), 0.5) == pytest.approx(-1.0, rel=1e-9)
    assert abs(apply_vanhove_numeric(derive_vanhove(4), MomentSpec(Family.IV, 2, 4, 1, 0.5), 0.5)) < 1e-8


def test_fifth_symmetric_power_and_adjoint():
    t = lambda *c: Poly(c, "t")  # noqa: E731
    # theta coefficient 8 t^2 (8 t^2 - 9); the displayed form has a stray factor t
    l5 = bmw_symmetric_power(4)
    assert l5.coeffs == (t(0, 0, -32, 0, 128), t(0, 0, -72, 0, 64), t(0, 0, -60), t(0, 0, -20), t(), t(1))
    adjoint = formal_adjoint(l5.to_plain())
    assert adjoint.coeffs == (
        t(-1, 0, 184, 0, -192),
        t(0, -31, 0, 392, 0, -64),
        t(0, 0, -90, 0, 180),
        t(0, 0, 0, -65, 0, 20),
        t(0, 0, 0, 0, -15),
        t(0, 0, 0, 0, 0, -1),
    )
