import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bessellab import moments
from bessellab.moments import (
    DivergentMomentError,
    Family,
    MomentCache,
    MomentSpec,
    evaluate,
    heaviside_moment,
    ikm,
    ip,
    iv,
    kp,
    kv,
    u_derivative,
    vacuum,
    weber_schafheitlin,
)

mpmath.mp.dps = 25


def _mp_moment(family, a, b, n, u=None):
    """Independent oracle: mpmath quadrature of the defining integral."""
    r = mpmath.sqrt(u) if u is not None else None

    def f(t):
        if family == "IKM":
            return mpmath.besseli(0, t) ** a * mpmath.besselk(0, t) ** b * t**n
        if family == "IvKM":
            return mpmath.besseli(0, r * t) * mpmath.besseli(0, t) ** (a - 1) * mpmath.besselk(0, t) ** b * t**n
        if family == "IpKM":
            return mpmath.besseli(1, r * t) * mpmath.besseli(0, t) ** (a - 1) * mpmath.besselk(0, t) ** b * t ** (n + 1)
        if family == "IKvM":
            return mpmath.besselk(0, r * t) * mpmath.besseli(0, t) ** a * mpmath.besselk(0, t) ** (b - 1) * t**n
        if family == "IKpM":
            return -mpmath.besselk(1, r * t) * mpmath.besseli(0, t) ** a * mpmath.besselk(0, t) ** (b - 1) * t ** (n + 1)
        raise ValueError(family)

    return float(mpmath.quad(f, [0, 0.5, 2, 8, 30, mpmath.inf]))


@pytest.mark.parametrize(
    "family, a, b, n, u",
    [
        ("IKM", 2, 3, 1, None),
        ("IKM", 1, 4, 3, None),
        ("IKM", 0, 5, 1, None),
        ("IvKM", 2, 3, 1, 0.5),
        ("IvKM", 1, 4, 3, 3.0),
        ("IpKM", 2, 4, 1, 0.25),
        ("IKvM", 1, 4, 1, 2.0),
        ("IKvM", 0, 5, 1, 0.5),
        ("IKpM", 2, 3, 1, 0.75),
    ],
)
def test_against_mpmath_quadrature(family, a, b, n, u, fresh_cache):
    spec = MomentSpec(Family(family), a, b, n, u)
    ours = evaluate(spec, 1e-13).value
    assert ours == pytest.approx(_mp_moment(family, a, b, n, u), rel=1e-12)


def test_classical_values(fresh_cache):
    assert ikm(1, 2, 1) == pytest.approx(math.pi / (3 * math.sqrt(3)), rel=1e-13)
    assert ikm(1, 3, 1) == pytest.approx(math.pi**2 / 16, rel=1e-13)
    assert ikm(0, 1, 1) == pytest.approx(1.0, rel=1e-14)
    assert ikm(0, 2, 1) == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("k", [1, 2, 3, 6])
def test_heaviside_moment(k, fresh_cache):
    assert ikm(0, 1, k - 1) == pytest.approx(heaviside_moment(k), rel=1e-13)


@pytest.mark.parametrize("u", [0.0, 0.3, 0.81])
@pytest.mark.parametrize("n", [1, 3])
def test_weber_schafheitlin(u, n, fresh_cache):
    if u > 0:
        assert iv(1, 1, n, u) == pytest.approx(weber_schafheitlin("I0K0", n, u), rel=1e-12)
        assert ip(1, 1, n - 1, u) == pytest.approx(weber_schafheitlin("I1K0", n, u), rel=1e-12)
    else:
        assert ikm(0, 1, n) == pytest.approx(weber_schafheitlin("I0K0", n, 0.0), rel=1e-13)


def test_two_scale_at_unit_u_reduces_to_plain(fresh_cache):
    plain = ikm(2, 3, 1)
    assert iv(2, 3, 1, 1.0) == pytest.approx(plain, rel=1e-13)
    assert kv(2, 3, 1, 1.0) == pytest.approx(plain, rel=1e-13)


@pytest.mark.parametrize("u", [0.3, 1.7])
def test_first_derivative_is_the_p_moment(u, fresh_cache):
    root = math.sqrt(u)
    d_iv = u_derivative(MomentSpec(Family.IV, 2, 3, 1, u), 1)
    d_kv = u_derivative(MomentSpec(Family.KV, 1, 4, 1, u), 1)
    assert d_iv == pytest.approx(ip(2, 3, 1, u) / (2 * root), rel=1e-11)
    assert d_kv == pytest.approx(kp(1, 4, 1, u) / (2 * root), rel=1e-11)


@pytest.mark.parametrize("m, tol", [(1, 1e-11), (2, 1e-10), (3, 1e-8)])
def test_higher_derivatives_against_polynomial_fit(m, tol, fresh_cache):
    # Chebyshev fit of the values on [0.4, 0.6], differentiated
    spec = MomentSpec(Family.KV, 1, 4, 1, 0.5)
    us = 0.5 + np.linspace(-0.1, 0.1, 21)
    fit = np.polynomial.chebyshev.Chebyshev.fit(us, [kv(1, 4, 1, float(u), rel_tol=1e-14) for u in us], 12)
    assert u_derivative(spec, m) == pytest.approx(fit.deriv(m)(0.5), rel=tol)


def test_derivative_at_zero_uses_taylor(fresh_cache):
    spec = MomentSpec(Family.IV, 1, 3, 1, 0.0)
    # d/du I0(sqrt(u) t) at u=0 is t^2/4
    assert u_derivative(spec, 1) == pytest.approx(ikm(0, 3, 3) / 4, rel=1e-13)
    with pytest.raises(DivergentMomentError):
        u_derivative(MomentSpec(Family.KV, 1, 3, 1, 0.0), 1)


def test_bessel_ode_step(fresh_cache):
    # (u D^2 + D) of IvKM(1,4;1|u) equals IvKM(1,4;3|u)/4
    spec = MomentSpec(Family.IV, 1, 4, 1, 0.6)
    lhs = 0.6 * u_derivative(spec, 2) + u_derivative(spec, 1)
    assert lhs == pytest.approx(iv(1, 4, 3, 0.6) / 4, rel=1e-11)


@pytest.mark.parametrize("n", [3, 4])
def test_vacuum(n, fresh_cache):
    assert vacuum(n) == pytest.approx(_mp_moment("IKM", 0, n, 1), rel=1e-12)


@pytest.mark.parametrize(
    "text",
    ["IKM(2,1;1)", "IKM(1,1;1)", "IvKM(3,1;1|1.0)", "IKvM(1,2;1|0.0)", "IvKM(2,2;1|1.0)"],
)
def test_divergent_moments_raise(text):
    with pytest.raises(DivergentMomentError):
        evaluate(MomentSpec.parse(text))


@pytest.mark.parametrize("text", ["IKM(1,2;1|0.5)", "IvKM(0,3;1|0.5)", "IKvM(3,0;1|0.5)", "IvKM(1,3;1)", "IKM(7,7;1)", "foo"])
def test_invalid_specs(text):
    with pytest.raises(ValueError):
        MomentSpec.parse(text)


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(list(Family)),
    st.integers(1, 5),
    st.integers(1, 5),
    st.integers(0, 7),
    st.floats(min_value=0.01, max_value=9.0, allow_nan=False),
)
def test_parse_canonical_roundtrip(family, a, b, n, u):
    spec = MomentSpec(family, a, b, n, None if family is Family.PLAIN else u)
    assert MomentSpec.parse(spec.canonical()) == spec


def test_cache_persists_and_survives_torn_line(tmp_path):
    path = tmp_path / "cache.jsonl"
    cache = MomentCache(path)
    v = evaluate(MomentSpec.plain(1, 3, 1), 1e-12, cache).value
    assert len(cache) == 1
    with open(path, "a", encoding="utf-8") as fh:
        fh.write('{"key": "IKM(1')  # interrupted write
    reloaded = MomentCache(path)
    assert len(reloaded) == 1
    rec = reloaded.get("IKM(1,3;1)", 1e-12)
    assert rec["value"] == v
    assert reloaded.get("IKM(1,3;1)", 1e-13) is None  # exact-tolerance lookups only
    reloaded.clear()
    assert not path.exists() and len(reloaded) == 0


def test_cache_hit_returns_stored_value():
    cache = MomentCache()
    cache.put("IKM(1,3;1)", 1e-12, 42.0, 0.0, "test")
    assert evaluate(MomentSpec.plain(1, 3, 1), 1e-12, cache).value == 42.0
    assert json.loads(json.dumps(cache.records()))[0]["engine"] == "test"


def test_default_cache_swap(fresh_cache):
    ikm(0, 3, 1)
    assert moments.default_cache() is fresh_cache
    assert len(fresh_cache) == 1


def test_weber_schafheitlin_examples(fresh_cache):
    # int I0(sqrt(u) t) K0(t) t = 1/(1-u) and int I1(sqrt(u) t) K0(t) t^2 = 2 sqrt(u)/(1-u)^2
    assert iv(1, 1, 1, 0.25) == pytest.approx(4 / 3, rel=1e-13)
    assert ip(1, 1, 1, 0.25) == pytest.approx(16 / 9, rel=1e-13)
    spec = MomentSpec(Family.IV, 1, 1, 1, 0.5)
    assert u_derivative(spec, 0) == pytest.approx(2.0, rel=1e-13)
    assert u_derivative(spec, 1) == pytest.approx(4.0, rel=1e-12)
    assert u_derivative(spec, 3, u=0.0) == pytest.approx(6.0, rel=1e-13)
