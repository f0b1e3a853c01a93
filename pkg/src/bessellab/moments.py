"""Bessel moments and their two-scale variants.

Notation (``n`` is the power of ``t``; counts include the rescaled kernel):

==========  ==================================================================
family      integrand over ``t in (0, inf)``
==========  ==================================================================
``plain``   ``I0(t)**a K0(t)**b t**n``
``iv``      ``I0(sqrt(u) t) I0(t)**(a-1) K0(t)**b t**n``
``ip``      ``I1(sqrt(u) t) I0(t)**(a-1) K0(t)**b t**(n+1)``
``kv``      ``K0(sqrt(u) t) I0(t)**a K0(t)**(b-1) t**n``
``kp``      ``-K1(sqrt(u) t) I0(t)**a K0(t)**(b-1) t**(n+1)``
==========  ==================================================================

``ip``/``kp`` are the ``u``-derivatives of ``iv``/``kv`` up to a factor
``2 sqrt(u)``.  Higher ``u``-derivatives are produced from exact symbolic
derivatives of the rescaled kernel (:class:`DerivedKernelExpr`) and one
quadrature per derivative.
"""

from __future__ import annotations

import enum
import functools
import json
import math
import os
import re
import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from .kernels import EULER_GAMMA, gamma_fn, i0e, i1e, k0e, k1e
from .polynomials import Laurent2
from .quadrature import IntegrandMeta, QuadratureError, integrate_decaying

MAX_KERNELS = 12
MIN_DECAY = 1e-3
WARN_DECAY = 1e-2
CACHE_ENV = "BESSELLAB_CACHE"


class Family(enum.Enum):
    PLAIN = "IKM"
    IV = "IvKM"
    IP = "IpKM"
    KV = "IKvM"
    KP = "IKpM"

    @property
    def rescaled(self) -> Optional[str]:
        return {Family.IV: "I", Family.IP: "I", Family.KV: "K", Family.KP: "K"}.get(self)


class DivergentMomentError(ValueError):
    """The requested moment does not converge (or is too close to it)."""


_SPEC_RE = re.compile(
    r"^\s*(IKM|IvKM|IpKM|IKvM|IKpM)\(\s*(\d+)\s*,\s*(\d+)\s*;\s*(\d+)\s*(?:\|\s*([^)\s]+)\s*)?\)\s*$"
)


@dataclass(frozen=True)
class MomentSpec:
    family: Family
    a: int
    b: int
    n: int
    u: Optional[float] = None

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.n < 0:
            raise ValueError("moment indices must be non-negative")
        if self.a + self.b > MAX_KERNELS:
            raise ValueError(f"at most {MAX_KERNELS} kernels per moment")
        if self.family is Family.PLAIN:
            if self.u is not None:
                raise ValueError("plain moments take no u")
        else:
            if self.u is None:
                raise ValueError("two-scale moments need u")
            object.__setattr__(self, "u", float(self.u))
            if self.u < 0:
                raise ValueError("u must be non-negative")
            if self.family.rescaled == "I" and self.a < 1:
                raise ValueError("iv/ip moments need a >= 1")
            if self.family.rescaled == "K" and self.b < 1:
                raise ValueError("kv/kp moments need b >= 1")

    # ------------------------------------------------------------------
    @classmethod
    def plain(cls, a: int, b: int, n: int) -> "MomentSpec":
        return cls(Family.PLAIN, a, b, n)

    @classmethod
    def parse(cls, text: str) -> "MomentSpec":
        """Inverse of :meth:`canonical`, e.g. ``"IvKM(2,3;1|0.5)"``."""
        m = _SPEC_RE.match(text)
        if not m:
            raise ValueError(f"cannot parse moment spec {text!r}")
        fam, a, b, n, u = m.groups()
        return cls(Family(fam), int(a), int(b), int(n), float(u) if u is not None else None)

    def canonical(self) -> str:
        core = f"{self.family.value}({self.a},{self.b};{self.n}"
        if self.family is Family.PLAIN:
            return core + ")"
        return core + f"|{self.u!r})"

    def __str__(self) -> str:
        return self.canonical()

    def with_u(self, u: float) -> "MomentSpec":
        return MomentSpec(self.family, self.a, self.b, self.n, u)

    # ------------------------------------------------------------------
    @property
    def decay_exponent(self) -> float:
        """Exponential decay rate of the integrand at infinity."""
        if self.family is Family.PLAIN:
            return float(self.b - self.a)
        root = math.sqrt(self.u)
        if self.family.rescaled == "I":
            return (self.b - (self.a - 1)) - root
        return (self.b - 1 - self.a) + root

    @property
    def algebraic_power(self) -> float:
        """Power of ``t`` in the integrand at infinity, ignoring exponentials."""
        extra = 1 if self.family in (Family.IP, Family.KP) else 0
        return self.n + extra - 0.5 * (self.a + self.b)

    def check_convergent(self) -> None:
        delta = self.decay_exponent
        if self.family is Family.PLAIN:
            if delta < 0 or (delta == 0 and self.algebraic_power >= -1):
                raise DivergentMomentError(f"{self} diverges at infinity")
            return
        if self.family.rescaled == "K" and self.u == 0:
            raise DivergentMomentError(f"{self} is singular at u = 0")
        if delta < MIN_DECAY:
            raise DivergentMomentError(f"{self}: decay rate {delta:.3g} below {MIN_DECAY}")
        if delta < WARN_DECAY:
            warnings.warn(f"{self}: slow decay rate {delta:.3g}", RuntimeWarning, stacklevel=3)


# ---------------------------------------------------------------------------
# integrands


def _background(t: np.ndarray, n_i: int, n_k: int, power: int, delta: float) -> np.ndarray:
    out = t**power * np.exp(-delta * t)
    if n_i:
        out = out * i0e(t) ** n_i
    if n_k:
        out = out * k0e(t) ** n_k
    return out


def integrand(spec: MomentSpec):
    """Vectorised integrand of ``spec`` built from scaled kernels."""
    delta = max(spec.decay_exponent, 0.0)
    fam = spec.family
    if fam is Family.PLAIN:
        return lambda t: _background(t, spec.a, spec.b, spec.n, delta)
    root = math.sqrt(spec.u)
    if fam is Family.IV:
        return lambda t: i0e(root * t) * _background(t, spec.a - 1, spec.b, spec.n, delta)
    if fam is Family.IP:
        return lambda t: i1e(root * t) * _background(t, spec.a - 1, spec.b, spec.n + 1, delta)
    if fam is Family.KV:
        return lambda t: k0e(root * t) * _background(t, spec.a, spec.b - 1, spec.n, delta)
    return lambda t: -k1e(root * t) * _background(t, spec.a, spec.b - 1, spec.n + 1, delta)


@dataclass(frozen=True)
class MomentValue:
    spec: MomentSpec
    value: float
    err_estimate: float
    engine: str = "de"

    def __float__(self) -> float:
        return self.value


# ---------------------------------------------------------------------------
# cache


class MomentCache:
    """Moment values keyed by canonical spec string and tolerance.

    Lookups are exact-match only.  With a ``path`` the cache is persisted as
    JSON lines ``{"key", "tol", "value", "err", "engine"}``.
    """

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path else None
        self._data: dict[tuple[str, float], dict] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    self._data[(rec["key"], float(rec["tol"]))] = rec
                except (ValueError, KeyError):
                    continue  # skip a torn final line

    def get(self, key: str, tol: float) -> Optional[dict]:
        with self._lock:
            return self._data.get((key, float(tol)))

    def put(self, key: str, tol: float, value: float, err: float, engine: str) -> None:
        rec = {"key": key, "tol": float(tol), "value": value, "err": err, "engine": engine}
        with self._lock:
            if (key, float(tol)) in self._data:
                return
            self._data[(key, float(tol))] = rec
            if self.path:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec) + "\n")

    def records(self) -> list[dict]:
        with self._lock:
            return list(self._data.values())

    def clear(self) -> None:
        with self._lock:
            self._data.clear()
            if self.path and self.path.exists():
                self.path.unlink()

    def __len__(self) -> int:
        return len(self._data)


_default_cache = MomentCache(os.environ.get(CACHE_ENV) or None)


def default_cache() -> MomentCache:
    return _default_cache


def set_default_cache(cache: MomentCache) -> None:
    global _default_cache
    _default_cache = cache


def _cached_quad(key: str, rel_tol: float, fn, meta: IntegrandMeta, cache: MomentCache | None) -> tuple[float, float]:
    cache = _default_cache if cache is None else cache
    hit = cache.get(key, rel_tol)
    if hit is not None:
        return hit["value"], hit["err"]
    res = integrate_decaying(fn, meta, rel_tol=rel_tol)
    if not res.converged:
        raise QuadratureError(f"{key}: quadrature did not reach rel_tol {rel_tol:g}")
    cache.put(key, rel_tol, res.value, res.err_estimate, "de")
    return res.value, res.err_estimate


def evaluate(spec: MomentSpec, rel_tol: float = 1e-13, cache: MomentCache | None = None) -> MomentValue:
    """Numerical value of any moment family."""
    spec.check_convergent()
    meta = IntegrandMeta(
        decay_exponent=max(spec.decay_exponent, 0.0),
        endpoint_log_power=spec.b,
    )
    value, err = _cached_quad(spec.canonical(), rel_tol, integrand(spec), meta, cache)
    return MomentValue(spec, value, err)


def ikm(a: int, b: int, n: int, rel_tol: float = 1e-13, cache: MomentCache | None = None) -> float:
    """``int_0^inf I0(t)**a K0(t)**b t**n dt``."""
    return evaluate(MomentSpec.plain(a, b, n), rel_tol, cache).value


def two_scale(spec: MomentSpec, rel_tol: float = 1e-13, cache: MomentCache | None = None) -> float:
    """Value of an ``iv``/``ip``/``kv``/``kp`` moment."""
    if spec.family is Family.PLAIN:
        raise ValueError("two_scale expects a rescaled family")
    return evaluate(spec, rel_tol, cache).value


def iv(a, b, n, u, **kw) -> float:
    return two_scale(MomentSpec(Family.IV, a, b, n, u), **kw)


def ip(a, b, n, u, **kw) -> float:
    return two_scale(MomentSpec(Family.IP, a, b, n, u), **kw)


def kv(a, b, n, u, **kw) -> float:
    return two_scale(MomentSpec(Family.KV, a, b, n, u), **kw)


def kp(a, b, n, u, **kw) -> float:
    return two_scale(MomentSpec(Family.KP, a, b, n, u), **kw)


# ---------------------------------------------------------------------------
# u-derivatives


@dataclass(frozen=True)
class DerivedKernelExpr:
    """``c0(t, v) X0(v t) + c1(t, v) X1(v t)`` with ``v = sqrt(u)``.

    ``family`` is ``"I"`` or ``"K"``; ``X0, X1`` are the order-0/1 kernels.
    """

    family: str
    c0: Laurent2
    c1: Laurent2

    @property
    def sigma(self) -> int:
        return 1 if self.family == "I" else -1

    @classmethod
    def seed(cls, family: str) -> "DerivedKernelExpr":
        return cls(family, Laurent2.const(1), Laurent2())

    def d_du(self) -> "DerivedKernelExpr":
        """Exact ``d/du`` using ``dX0 = s t X1/(2v)``, ``dX1 = s t X0/(2v) - X1/(2u)``."""
        half = Fraction(1, 2)
        du0 = self.c0.d_dv().shift(0, -1, half)
        du1 = self.c1.d_dv().shift(0, -1, half)
        s = self.sigma
        new0 = du0 + self.c1.shift(1, -1, s * half)
        new1 = du1 + self.c0.shift(1, -1, s * half) - self.c1.shift(0, -2, half)
        return type(self)(self.family, new0, new1)

    def evaluate(self, t: np.ndarray, u: float) -> tuple[np.ndarray, np.ndarray]:
        """Coefficient arrays ``(c0, c1)`` at nodes ``t``."""
        v = math.sqrt(u)
        return self.c0.evaluate(t, v), self.c1.evaluate(t, v)


@functools.lru_cache(maxsize=None)
def kernel_derivative(family: str, m: int) -> DerivedKernelExpr:
    """``d^m/du^m X0(sqrt(u) t)`` as an exact expression."""
    if m < 0:
        raise ValueError("derivative order must be non-negative")
    if m == 0:
        return DerivedKernelExpr.seed(family)
    return kernel_derivative(family, m - 1).d_du()


_I_DERIV_SERIES_SEAM = 20.0
_K_DERIV_SERIES_SEAM = 2.0


def _i_derivative_series(m: int, z: np.ndarray, u: float) -> np.ndarray:
    """sum_{k>=m} z**k u**(k-m) / (k! (k-m)!) with z = t**2/4."""
    term = z**m / math.factorial(m)
    total = term.copy()
    for k in range(m, m + 400):
        term = term * z * u / ((k + 1) * (k + 1 - m))
        total += term
        if np.all(term <= 1e-17 * total):
            break
    return total


def _k_derivative_series(m: int, t: np.ndarray, u: float) -> np.ndarray:
    """Ascending series of d^m/du^m K0(sqrt(u) t), logarithmic terms included."""
    z = 0.25 * t * t
    base = -np.log(0.5 * t) - EULER_GAMMA - 0.5 * math.log(u)
    total = np.zeros_like(t)
    for k in range(m):
        coef = -0.5 * (-1) ** (m - k - 1) * math.factorial(m - k - 1) / math.factorial(k)
        total += coef * z**k * u ** (k - m)
    harm_k = sum(1.0 / j for j in range(1, m + 1))  # H_m
    harm_km = 0.0  # H_{k-m}
    term = z**m / math.factorial(m)
    for k in range(m, m + 400):
        if k > m:
            term = term * z * u / (k * (k - m))
            harm_k += 1.0 / k
            harm_km += 1.0 / (k - m)
        add = term * (base + harm_k - 0.5 * (harm_k - harm_km))
        total += add
        if k > m + 2 and np.all(np.abs(add) <= 1e-17 * np.abs(total)):
            break
    return total


def kernel_derivative_scaled(family: str, m: int, t: np.ndarray, u: float) -> np.ndarray:
    """``d^m/du^m X0(sqrt(u) t)`` times ``exp(-+sqrt(u) t)`` at array ``t``.

    Small arguments use the exact ascending series in ``u`` (no cancellation
    between the ``X0`` and ``X1`` parts); larger ones the symbolic form.
    """
    t = np.asarray(t, dtype=float)
    root = math.sqrt(u)
    x = root * t
    out = np.empty_like(t)
    if family == "I":
        small = x < _I_DERIV_SERIES_SEAM
        if np.any(small):
            ts = t[small]
            out[small] = _i_derivative_series(m, 0.25 * ts * ts, u) * np.exp(-x[small])
        x0, x1 = i0e, i1e
    else:
        small = x < _K_DERIV_SERIES_SEAM
        if np.any(small):
            out[small] = _k_derivative_series(m, t[small], u) * np.exp(x[small])
        x0, x1 = k0e, k1e
    big = ~small
    if np.any(big):
        expr = kernel_derivative(family, m)
        c0, c1 = expr.evaluate(t[big], u)
        out[big] = c0 * x0(x[big]) + c1 * x1(x[big])
    return out


def u_derivative(
    spec: MomentSpec,
    m: int,
    u: Optional[float] = None,
    rel_tol: float = 1e-12,
    cache: MomentCache | None = None,
) -> float:
    """``d^m/du^m`` of an ``iv`` or ``kv`` moment at ``u``.

    ``u`` defaults to ``spec.u``.  At ``u = 0`` (``iv`` only) the Taylor
    coefficient ``t**(2m) / (4**m m!)`` of ``I0(sqrt(u) t)`` is used.
    """
    if spec.family not in (Family.IV, Family.KV):
        raise ValueError("u_derivative applies to iv and kv moments")
    u = spec.u if u is None else float(u)
    spec = spec.with_u(u)
    if m == 0:
        return two_scale(spec, rel_tol, cache)
    spec.check_convergent()
    delta = spec.decay_exponent
    fam = spec.family
    key = f"D{m}{spec.canonical()}"
    n_i = spec.a - 1 if fam is Family.IV else spec.a
    n_k = spec.b if fam is Family.IV else spec.b - 1
    if u == 0.0:
        if fam is Family.KV:
            raise DivergentMomentError("kv derivatives are singular at u = 0")
        scale = 1.0 / (4.0**m * math.factorial(m))

        def f(t):
            return scale * _background(t, n_i, n_k, spec.n + 2 * m, delta)

    else:
        family = spec.family.rescaled

        def f(t):
            return kernel_derivative_scaled(family, m, t, u) * _background(t, n_i, n_k, spec.n, delta)

    meta = IntegrandMeta(decay_exponent=delta, endpoint_log_power=spec.b)
    value, _ = _cached_quad(key, rel_tol, f, meta, cache)
    return value


# ---------------------------------------------------------------------------
# closed forms


def vacuum(n: int, rel_tol: float = 1e-13) -> float:
    """Vacuum moment ``IKM(0, n; 1)``."""
    if n < 1:
        raise ValueError("vacuum moments start at n = 1")
    return ikm(0, n, 1, rel_tol)


def _hyp2f1_equal(a: float, c: float, z: float) -> float:
    """``2F1(a, a; c; z)`` by its power series (``|z| < 1``)."""
    if not -1 < z < 1:
        raise ValueError("hypergeometric series needs |z| < 1")
    term = 1.0
    total = 1.0
    for k in range(100000):
        term *= (a + k) * (a + k) / ((c + k) * (k + 1)) * z
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total
    raise ArithmeticError("hypergeometric series did not converge")


def weber_schafheitlin(kind: str, n: int, u: float) -> float:
    """Closed forms of ``int I0(sqrt(u) t) K0(t) t**n`` and the ``I1`` analogue.

    ``kind`` is ``"I0K0"`` or ``"I1K0"``; ``0 <= u < 1``.
    """
    if not 0 <= u < 1:
        raise ValueError("weber_schafheitlin needs 0 <= u < 1")
    if kind == "I0K0":
        half = 0.5 * (n + 1)
        return 2.0 ** (n - 1) * gamma_fn(half) ** 2 * _hyp2f1_equal(half, 1.0, u)
    if kind == "I1K0":
        half = 0.5 * (n + 2)
        return 2.0 ** (n - 1) * math.sqrt(u) * gamma_fn(half) ** 2 * _hyp2f1_equal(half, 2.0, u)
    raise ValueError(f"unknown kind {kind!r}")


def heaviside_moment(k: int) -> float:
    """``int_0^inf K0(t) t**(k-1) dt = 2**(k-2) Gamma(k/2)**2``."""
    if k < 1:
        raise ValueError("heaviside_moment needs k >= 1")
    return 2.0 ** (k - 2) * gamma_fn(0.5 * k) ** 2
