"""Exact differential operators acting on Bessel kernels and moments.

* ``bmw_symmetric_power(n)`` builds the order ``n + 1`` symmetric power of
  the modified Bessel operator ``theta**2 - t**2`` by the
  Bronstein-Mulders-Weil recursion.
* ``formal_adjoint`` and ``bessel_closure_apply`` act on operators in ``t``.
* ``derive_vanhove(n)`` reconstructs the order-``n`` operator in ``u`` that is
  intertwined with the adjoint of ``L_{n+2}`` on rescaled kernels, by solving
  an exact linear system over ``Q[u]``.
* ``apply_vanhove_numeric`` applies such an operator to a two-scale moment,
  using exact kernel derivatives for every ``d/du``.

Symbolic paths use :class:`fractions.Fraction` only.
"""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from . import moments
from .kernels import i0e, i1e, k0e, k1e
from .moments import DerivedKernelExpr, Family, MomentSpec, kernel_derivative
from .polynomials import Laurent2, Poly, format_poly

MAX_VANHOVE_ORDER = 6


class Basis(enum.Enum):
    THETA = "theta"  # powers of x d/dx
    PLAIN = "plain"  # powers of d/dx


class InconsistentSystemError(ArithmeticError):
    """The linear system for a Vanhove operator has no solution."""


@dataclass(frozen=True)
class DiffOperator:
    """``sum_j coeffs[j](x) * B**j`` with ``B`` the basis derivation.

    ``variable`` is ``"t"`` or ``"u"``.
    """

    variable: str
    basis: Basis
    coeffs: tuple[Poly, ...]

    def __post_init__(self):
        cs = [Poly(p.coeffs, self.variable) for p in self.coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        if not cs:
            raise ValueError("the zero operator is not a DiffOperator")
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, j: int) -> Poly:
        return self.coeffs[j] if 0 <= j < len(self.coeffs) else Poly([], self.variable)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return (self.variable, self.basis, self.coeffs) == (other.variable, other.basis, other.coeffs)

    def __hash__(self):
        return hash((self.variable, self.basis, self.coeffs))

    def scaled(self, factor) -> "DiffOperator":
        return DiffOperator(self.variable, self.basis, tuple(p * factor for p in self.coeffs))

    # basis changes -------------------------------------------------------
    def to_plain(self) -> "DiffOperator":
        """``theta**k = sum_j S(k, j) x**j d**j`` built by the product rule."""
        if self.basis is Basis.PLAIN:
            return self
        out = [Poly([], self.variable) for _ in range(self.order + 1)]
        # expansion[j] = coefficient of x^j d^j in theta^k
        expansion = [1]
        for k, p in enumerate(self.coeffs):
            if k > 0:
                nxt = [0] * (k + 1)
                for j, s in enumerate(expansion):
                    nxt[j] += j * s
                    nxt[j + 1] += s
                expansion = nxt
            for j, s in enumerate(expansion):
                if s:
                    out[j] = out[j] + p * Poly.monomial(j, s, self.variable)
        return DiffOperator(self.variable, Basis.PLAIN, tuple(out))

    def to_theta(self) -> "DiffOperator":
        """Inverse of :meth:`to_plain`; needs ``x**j | coeffs[j]``."""
        if self.basis is Basis.THETA:
            return self
        out = [Poly([], self.variable) for _ in range(self.order + 1)]
        falling = Poly([1])  # theta (theta-1) ... (theta-j+1) as a polynomial in theta
        for j, p in enumerate(self.coeffs):
            if j > 0:
                falling = falling * Poly([-(j - 1), 1])
            if p.is_zero():
                continue
            if any(p.coeff(i) != 0 for i in range(j)):
                raise ValueError("operator has no polynomial theta form")
            reduced = Poly(p.coeffs[j:], self.variable)
            for k, s in enumerate(falling.coeffs):
                if s:
                    out[k] = out[k] + reduced * s
        return DiffOperator(self.variable, Basis.THETA, tuple(out))

    def __str__(self) -> str:
        return format_operator(self)


def format_operator(op: DiffOperator) -> str:
    """``(u^4 - 20*u^3 + 64*u^2)*D^3 + ...`` with exact coefficients."""
    if op.basis is Basis.THETA:
        sym = "theta"
    else:
        sym = "D" if op.variable == "u" else "d"
    parts = []
    for j in range(op.order, -1, -1):
        p = op.coeffs[j]
        if p.is_zero():
            continue
        body = format_poly(p)
        if j == 0:
            parts.append(body)
            continue
        mono = sym if j == 1 else f"{sym}^{j}"
        if body == "1":
            parts.append(mono)
        elif len(p.coeffs) - sum(1 for a in p.coeffs if a == 0) == 1 and not body.startswith("-"):
            parts.append(f"{body}*{mono}")
        else:
            parts.append(f"({body})*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# operators in t


def _theta_compose(coeffs: list[Poly]) -> list[Poly]:
    """Coefficients of ``theta o (sum p_k theta**k)`` in the theta basis."""
    out = [Poly([], "t") for _ in range(len(coeffs) + 1)]
    for k, p in enumerate(coeffs):
        out[k + 1] = out[k + 1] + p
        out[k] = out[k] + Poly.monomial(1, 1, "t") * p.deriv()
    return out


@functools.lru_cache(maxsize=None)
def bmw_symmetric_power(n: int) -> DiffOperator:
    """Order ``n + 1`` operator ``L_{n+1}`` in the theta basis.

    ``L_{n+1,0} = 1``, ``L_{n+1,1} = theta`` and
    ``L_{n+1,k+1} = theta L_{n+1,k} - k (n+1-k) t**2 L_{n+1,k-1}``.
    """
    if n < 1:
        raise ValueError("bmw_symmetric_power needs n >= 1")
    t2 = Poly.monomial(2, 1, "t")
    prev = [Poly([1], "t")]
    cur = [Poly([], "t"), Poly([1], "t")]
    for k in range(1, n + 1):
        nxt = _theta_compose(cur)
        for j, p in enumerate(prev):
            nxt[j] = nxt[j] - t2 * p * (k * (n + 1 - k))
        prev, cur = cur, nxt
    return DiffOperator("t", Basis.THETA, tuple(cur))


def formal_adjoint(op: DiffOperator) -> DiffOperator:
    """``sum_k (-1)**k d**k o lambda_k`` expanded in the plain basis."""
    if op.basis is not Basis.PLAIN:
        raise ValueError("formal_adjoint expects a plain-basis operator")
    out = []
    for i in range(op.order + 1):
        acc = Poly([], op.variable)
        for k in range(i, op.order + 1):
            d = op.coeffs[k]
            for _ in range(k - i):
                d = d.deriv()
            acc = acc + d * ((-1) ** k * math.comb(k, i))
        out.append(acc)
    return DiffOperator(op.variable, Basis.PLAIN, tuple(out))


# ---------------------------------------------------------------------------
# Bessel kernel combinations


class BesselCombo(DerivedKernelExpr):
    """``c0(t, v) X0(v t) + c1(t, v) X1(v t)``, closed under ``d/dt`` and ``d/du``."""

    def d_dt(self) -> "BesselCombo":
        s = self.sigma
        new0 = self.c0.d_dt() + self.c1.shift(0, 1, s)
        new1 = self.c1.d_dt() + self.c0.shift(0, 1, s) - self.c1.shift(-1, 0)
        return BesselCombo(self.family, new0, new1)

    def times(self, factor: Laurent2) -> "BesselCombo":
        return BesselCombo(self.family, self.c0 * factor, self.c1 * factor)

    def __add__(self, other: "BesselCombo") -> "BesselCombo":
        if other.family != self.family:
            raise ValueError("cannot add combos of different kernel families")
        return BesselCombo(self.family, self.c0 + other.c0, self.c1 + other.c1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DerivedKernelExpr)
            and self.family == other.family
            and self.c0 == other.c0
            and self.c1 == other.c1
        )

    __hash__ = DerivedKernelExpr.__hash__

    @classmethod
    def kernel(cls, family: str) -> "BesselCombo":
        return cls(family, Laurent2.const(1), Laurent2())

    def numeric(self, t, u: float) -> np.ndarray:
        """Numeric value at ``t`` for ``v = sqrt(u)``."""
        t = np.asarray(t, dtype=float)
        c0, c1 = self.evaluate(t, u)
        x = math.sqrt(u) * t
        if self.family == "I":
            scale = np.exp(x)
            return (c0 * i0e(x) + c1 * i1e(x)) * scale
        return (c0 * k0e(x) + c1 * k1e(x)) * np.exp(-x)


def _poly_to_laurent(p: Poly, variable: str) -> Laurent2:
    if variable == "t":
        return Laurent2({(k, 0): a for k, a in enumerate(p.coeffs)})
    return Laurent2({(0, 2 * k): a for k, a in enumerate(p.coeffs)})


def bessel_closure_apply(op: DiffOperator, seed: DerivedKernelExpr, extra_factor=0) -> BesselCombo:
    """Apply ``op`` exactly to ``seed * t**extra_factor``."""
    combo = BesselCombo(seed.family, seed.c0, seed.c1)
    if extra_factor:
        combo = combo.times(Laurent2.monomial(Fraction(extra_factor), 0))
    plain = op.to_plain()
    step = BesselCombo.d_dt if op.variable == "t" else BesselCombo.d_du
    result = BesselCombo(seed.family, Laurent2(), Laurent2())
    current = combo
    for j, p in enumerate(plain.coeffs):
        if j > 0:
            current = step(current)
            current = BesselCombo(current.family, current.c0, current.c1)
        if not p.is_zero():
            result = result + current.times(_poly_to_laurent(p, op.variable))
    return result


@dataclass(frozen=True)
class KernelProduct:
    """``sum c[(p, q)](t) X0(t)**p X1(t)**q`` for one kernel family."""

    family: str
    terms: tuple[tuple[tuple[int, int], Laurent2], ...]

    @classmethod
    def power(cls, family: str, p: int) -> "KernelProduct":
        return cls(family, (((p, 0), Laurent2.const(1)),))

    def _as_dict(self) -> dict:
        return dict(self.terms)

    @staticmethod
    def _from_dict(family: str, d: dict) -> "KernelProduct":
        return KernelProduct(family, tuple((k, v) for k, v in sorted(d.items()) if not v.is_zero()))

    def d_dt(self) -> "KernelProduct":
        s = 1 if self.family == "I" else -1
        out: dict = {}

        def add(key, val):
            out[key] = out.get(key, Laurent2()) + val

        for (p, q), c in self.terms:
            add((p, q), c.d_dt())
            if p:
                add((p - 1, q + 1), c * (p * s))
            if q:
                add((p + 1, q - 1), c * (q * s))
                add((p, q), c.shift(-1, 0, -q))
        return self._from_dict(self.family, out)

    def apply(self, op: DiffOperator) -> "KernelProduct":
        if op.variable != "t":
            raise ValueError("KernelProduct operators act in t")
        plain = op.to_plain()
        out: dict = {}
        cur = self
        for j, p in enumerate(plain.coeffs):
            if j > 0:
                cur = cur.d_dt()
            lp = _poly_to_laurent(p, "t")
            for key, c in cur.terms:
                out[key] = out.get(key, Laurent2()) + c * lp
        return self._from_dict(self.family, out)

    def evaluate(self, t: float) -> tuple[float, float]:
        """Value and the sum of absolute term values at ``t``."""
        if self.family == "I":
            x0, x1 = i0e(t) * math.exp(t), i1e(t) * math.exp(t)
        else:
            x0, x1 = k0e(t) * math.exp(-t), k1e(t) * math.exp(-t)
        total = scale = 0.0
        for (p, q), c in self.terms:
            for (i, _j), a in c.terms.items():
                term = float(a) * t ** float(i) * x0**p * x1**q
                total += term
                scale += abs(term)
        return total, scale


# ---------------------------------------------------------------------------
# Vanhove operators


def mathfrak_poly(kind: str, k: int) -> Poly:
    """Monic leading polynomials ``u**k prod (u - (2j)**2)`` (kind ``"m"``)
    or ``u**k prod_{j<=k+1} (u - (2j-1)**2)`` (kind ``"n"``)."""
    if k < 1:
        raise ValueError("mathfrak_poly needs k >= 1")
    if kind == "m":
        roots = [0] * k + [(2 * j) ** 2 for j in range(1, k + 1)]
    elif kind == "n":
        roots = [0] * k + [(2 * j - 1) ** 2 for j in range(1, k + 2)]
    else:
        raise ValueError("kind must be 'm' or 'n'")
    return Poly.from_roots(roots, "u")


def leading_poly_for_order(n: int) -> Poly:
    return mathfrak_poly("m", (n + 1) // 2) if n % 2 else mathfrak_poly("n", n // 2)


@dataclass(frozen=True)
class VanhovePair:
    """Vanhove operator of order ``n`` together with its normalisation data.

    ``normalization`` is the factor by which the solved operator was scaled
    to make ``leading_poly`` monic (``1`` when the intertwining relation
    already produces a monic operator).  ``solution_dim`` is the dimension
    of the solution space of the defining linear system.
    """

    n: int
    operator: DiffOperator
    leading_poly: Poly
    normalization: Fraction = Fraction(1)
    solution_dim: int = 1

    def coeff(self, j: int) -> Poly:
        return self.operator.coeff(j)

    def __str__(self) -> str:
        return format_operator(self.operator)


def _laurent_u_entry(coeffs: dict[int, Fraction], odd: bool) -> dict[int, Fraction]:
    """Convert ``{v_pow: c}`` to ``{u_pow: c}`` (dividing by ``v`` when odd)."""
    out = {}
    for j, c in coeffs.items():
        jj = j - 1 if odd else j
        if jj % 2:
            raise ArithmeticError("unexpected parity in kernel coefficient")
        out[jj // 2] = out.get(jj // 2, Fraction(0)) + c
    return out


def _entry_poly(entry: dict[int, Fraction], shift: int) -> Poly:
    out = Poly([], "u")
    for e, c in entry.items():
        out = out + Poly.monomial(e + shift, c, "u")
    return out


@dataclass
class _RatFunc:
    num: Poly
    den: Poly

    def reduced(self) -> "_RatFunc":
        if self.num.is_zero():
            return _RatFunc(Poly([], "u"), Poly([1], "u"))
        g = self.num.gcd(self.den)
        num = self.num.exact_div(g)
        den = self.den.exact_div(g)
        lead = den.lead
        return _RatFunc(num * (1 / lead), den * (1 / lead))


def _bareiss_solve(matrix: list[list[Poly]], n_unknowns: int) -> tuple[list[_RatFunc], int]:
    """Fraction-free elimination of the augmented system over ``Q[u]``."""
    rows = [list(r) for r in matrix]
    n_rows = len(rows)
    prev = Poly([1], "u")
    pivots: list[int] = []
    r = 0
    for col in range(n_unknowns):
        cands = [i for i in range(r, n_rows) if not rows[i][col].is_zero()]
        if not cands:
            continue
        p = min(cands, key=lambda i: (rows[i][col].degree, i))
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][col]
        for i in range(r + 1, n_rows):
            a = rows[i][col]
            for j in range(col + 1, n_unknowns + 1):
                rows[i][j] = (piv * rows[i][j] - a * rows[r][j]).exact_div(prev)
            rows[i][col] = Poly([], "u")
        prev = piv
        pivots.append(col)
        r += 1
    rank = r
    for i in range(rank, n_rows):
        if not rows[i][n_unknowns].is_zero():
            raise InconsistentSystemError("Vanhove system is inconsistent")
    dim = n_unknowns - rank
    if dim:
        return [], dim
    sol: list[_RatFunc] = [None] * n_unknowns  # type: ignore[list-item]
    for i in range(rank - 1, -1, -1):
        col = pivots[i]
        num = _RatFunc(rows[i][n_unknowns], Poly([1], "u"))
        for j in range(col + 1, n_unknowns):
            s = sol[j]
            if s.num.is_zero():
                continue
            num = _RatFunc(num.num * s.den - rows[i][j] * s.num * num.den, num.den * s.den)
        sol[col] = _RatFunc(num.num, num.den * rows[i][col]).reduced()
    return sol, 0


def intertwined_rhs(n: int) -> BesselCombo:
    """``(-1)**n 2**-n L*_{n+2}[K0(v t)/t] / t`` as an exact combo."""
    adj = formal_adjoint(bmw_symmetric_power(n + 1).to_plain())
    raw = bessel_closure_apply(adj, BesselCombo.kernel("K"), extra_factor=-1)
    return raw.times(Laurent2.monomial(-1, 0, Fraction((-1) ** n, 2**n)))


@functools.lru_cache(maxsize=None)
def derive_vanhove(n: int) -> VanhovePair:
    """Reconstruct the order-``n`` Vanhove operator ``L~_n`` exactly.

    Solves ``sum_j c_j(u) D**j K0(v t) = (-1)**n 2**-n L*_{n+2}[K0(v t)/t]/t``
    identically in ``t`` for polynomials ``c_j`` in ``u``.
    """
    if not 1 <= n <= MAX_VANHOVE_ORDER:
        raise ValueError(f"derive_vanhove supports 1 <= n <= {MAX_VANHOVE_ORDER}")
    rhs = intertwined_rhs(n)
    derivs = [kernel_derivative("K", j) for j in range(n + 1)]
    equations = []
    for part, odd in (("c0", False), ("c1", True)):
        powers = set(getattr(rhs, part).t_powers())
        for d in derivs:
            powers |= set(getattr(d, part).t_powers())
        for tp in sorted(powers):
            row = [_laurent_u_entry(getattr(d, part).coefficient_of_t(tp), odd) for d in derivs]
            row.append(_laurent_u_entry(getattr(rhs, part).coefficient_of_t(tp), odd))
            low = min((e for entry in row for e in entry), default=0)
            shift = -min(low, 0)
            equations.append([_entry_poly(entry, shift) for entry in row])
    sol, dim = _bareiss_solve(equations, n + 1)
    if dim:
        raise InconsistentSystemError(f"Vanhove system for n={n} has a {dim + 1}-dimensional solution space")
    denom = Poly([1], "u")
    for s in sol:
        denom = denom * s.den.exact_div(denom.gcd(s.den))
    if denom.degree > 0:
        raise ArithmeticError("Vanhove coefficients are not polynomial")
    coeffs = [s.num * denom.exact_div(s.den) for s in sol]
    lead = coeffs[-1].lead
    normalization = denom.lead / lead
    coeffs = [c * (1 / lead) for c in coeffs]
    op = DiffOperator("u", Basis.PLAIN, tuple(coeffs))
    return VanhovePair(n, op, op.coeffs[-1], normalization, 1)


def subleading_structure_holds(n: int) -> bool:
    """Whether the coefficient of ``D**(n-1)`` is ``n/2`` times the
    derivative of the leading polynomial."""
    pair = derive_vanhove(n)
    expected = pair.leading_poly.deriv() * Fraction(n, 2)
    return pair.coeff(n - 1) == expected


# ---------------------------------------------------------------------------
# numeric application

Target = Union[MomentSpec, str, Sequence[tuple[float, MomentSpec]]]


def _singular_points(pair: VanhovePair) -> list[float]:
    k = (pair.n + 1) // 2 if pair.n % 2 else pair.n // 2
    if pair.n % 2:
        return [0.0] + [float((2 * j) ** 2) for j in range(1, k + 1)]
    return [0.0] + [float((2 * j - 1) ** 2) for j in range(1, k + 2)]


def _normalize_target(pair: VanhovePair, target: Target) -> list[tuple[float, MomentSpec]]:
    if isinstance(target, str):
        if target != "checked-vacuum":
            raise ValueError(f"unknown target {target!r}")
        return [(1.0, MomentSpec(Family.KV, 0, pair.n + 2, 1, 1.0))]
    if isinstance(target, MomentSpec):
        return [(1.0, target)]
    return [(float(c), s) for c, s in target]


def apply_vanhove_numeric(pair: VanhovePair, target: Target, u: float, rel_tol: float = 1e-12) -> float:
    """``sum_j c_j(u) d^j/du^j target(u)`` from exact kernel derivatives.

    ``target`` is a two-scale ``iv``/``kv`` moment, a list of
    ``(coefficient, spec)`` pairs, or ``"checked-vacuum"`` for
    ``IKvM(0, n+2; 1|u)``.
    """
    near = min(abs(u - r) for r in _singular_points(pair))
    if near < 1e-2:
        warnings.warn(f"u={u} lies within {near:.2g} of a singular point", RuntimeWarning, stacklevel=2)
    total = 0.0
    for coef, spec in _normalize_target(pair, target):
        if spec.family not in (Family.IV, Family.KV):
            raise ValueError("Vanhove targets must be iv or kv moments")
        for j, p in enumerate(pair.operator.coeffs):
            if p.is_zero():
                continue
            total += coef * p(u) * moments.u_derivative(spec, j, u, rel_tol=rel_tol)
    return total
