"""Exact polynomial arithmetic over the rationals.

``Poly``
    Univariate polynomial with :class:`fractions.Fraction` coefficients.
``Laurent2``
    Bivariate Laurent polynomial in ``(t, v)``; exponents of ``t`` may be
    rational, exponents of ``v`` are integers.  Used for the coefficients of
    Bessel kernels ``X0(v t)``, ``X1(v t)`` under differentiation.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

Number = Union[int, Fraction]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class Poly:
    """Univariate polynomial, coefficients stored lowest degree first."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable = (), var: str = "x"):
        c = [_frac(a) for a in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)
        self.var = var

    # construction -----------------------------------------------------
    @classmethod
    def const(cls, a, var: str = "x") -> "Poly":
        return cls([a], var)

    @classmethod
    def monomial(cls, degree: int, coef=1, var: str = "x") -> "Poly":
        return cls([0] * degree + [coef], var)

    @classmethod
    def from_roots(cls, roots: Iterable, var: str = "x") -> "Poly":
        out = cls([1], var)
        for r in roots:
            out = out * cls([-_frac(r), 1], var)
        return out

    # basic properties -------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def _same(self, coeffs) -> "Poly":
        return Poly(coeffs, self.var)

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly([other], self.var)

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return self._same([self.coeff(k) + other.coeff(k) for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return self._same([-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            f = _frac(other)
            return self._same([a * f for a in self.coeffs])
        if self.is_zero() or other.is_zero():
            return self._same([])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return self._same(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self._same([1])
        for _ in range(k):
            out = out * self
        return out

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead = other.lead
        for k in range(len(quot) - 1, -1, -1):
            q = rem[k + other.degree] / lead
            quot[k] = q
            if q:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= q * b
        return self._same(quot), self._same(rem)

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError("polynomial division is not exact")
        return q

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self * (1 / self.lead)

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic()

    def deriv(self) -> "Poly":
        return self._same([k * a for k, a in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        acc = 0 if isinstance(x, (int, Fraction)) else 0.0
        for a in reversed(self.coeffs):
            acc = acc * x + (a if isinstance(x, (int, Fraction)) else float(a))
        return acc

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly([other])
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)})"

    def __str__(self) -> str:
        return format_poly(self)


def format_poly(p: Poly, var: str | None = None) -> str:
    """Human readable form, highest degree first: ``u^2 - 20*u + 64``."""
    var = var or p.var
    if p.is_zero():
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        a = p.coeffs[k]
        if a == 0:
            continue
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        if k == 0:
            body = str(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        parts.append((sign, body))
    head_sign, head = parts[0]
    out = ("-" if head_sign == "-" else "") + head
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


class Laurent2:
    """Laurent polynomial ``sum c[i, j] t**i v**j`` with exact coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        for (i, j), c in (terms or {}).items():
            c = _frac(c)
            if c != 0:
                clean[(_frac(i), int(j))] = c
        self.terms: dict[tuple[Fraction, int], Fraction] = clean

    @classmethod
    def const(cls, c) -> "Laurent2":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, t_pow, v_pow: int, coef=1) -> "Laurent2":
        return cls({(t_pow, v_pow): coef})

    @classmethod
    def from_poly_t(cls, p: Poly) -> "Laurent2":
        return cls({(k, 0): a for k, a in enumerate(p.coeffs)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Laurent2") -> "Laurent2":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, Fraction(0)) + c
        return Laurent2(out)

    def __neg__(self):
        return Laurent2({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "Laurent2":
        if not isinstance(other, Laurent2):
            f = _frac(other)
            return Laurent2({k: c * f for k, c in self.terms.items()})
        out: dict = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return Laurent2(out)

    __rmul__ = __mul__

    def shift(self, t_pow=0, v_pow: int = 0, coef=1) -> "Laurent2":
        """Multiply by ``coef * t**t_pow * v**v_pow``."""
        f = _frac(coef)
        tp = _frac(t_pow)
        return Laurent2({(i + tp, j + v_pow): c * f for (i, j), c in self.terms.items()})

    def d_dt(self) -> "Laurent2":
        return Laurent2({(i - 1, j): c * i for (i, j), c in self.terms.items() if i != 0})

    def d_dv(self) -> "Laurent2":
        return Laurent2({(i, j - 1): c * j for (i, j), c in self.terms.items() if j != 0})

    def __eq__(self, other) -> bool:
        return isinstance(other, Laurent2) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def t_powers(self) -> list[Fraction]:
        return sorted({i for i, _ in self.terms})

    def coefficient_of_t(self, i) -> dict[int, Fraction]:
        """``{v_pow: coef}`` for the monomials with ``t**i``."""
        i = _frac(i)
        return {j: c for (ti, j), c in self.terms.items() if ti == i}

    def evaluate(self, t, v: float):
        """Numeric value at array ``t`` and scalar ``v``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for (i, j), c in self.terms.items():
            out = out + float(c) * v**j * t ** float(i)
        return out

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        items = sorted(self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1]))
        return " + ".join(f"({c})*t^{i}*v^{j}" for (i, j), c in items)
