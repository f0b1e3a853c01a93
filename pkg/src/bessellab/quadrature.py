"""Quadrature engines for Bessel-moment integrands.

``integrate_decaying``
    Double-exponential rule on ``(0, inf)`` for integrands that decay like
    ``exp(-delta t)`` and may carry ``log(t)**p`` endpoint singularities.
``integrate_finite``
    tanh-sinh rule on a finite interval (endpoint singularities allowed).
``integrate_oscillatory``
    Integrals over ``(0, inf)`` of slowly decaying oscillatory integrands.
    Two modes: partition at Bessel-J zeros with Levin-type acceleration of
    the partial sums, or (when an asymptotic tail model is supplied) exact
    cell integration up to a cutoff plus the analytic tail.
``JProductSum``
    Integrand built from products of ``J0``/``J1`` at several scales, with an
    analytic tail derived from the Hankel expansions of its factors.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .kernels import KernelKind, bessel_j_zeros, j0, j1

Integrand = Callable[[np.ndarray], np.ndarray]

_DE_X_LO = -6.5
_DE_X_HI = 6.7
_MAX_DE_LEVEL = 8


class QuadratureError(RuntimeError):
    """Raised when a quadrature cannot reach its requested tolerance."""


@dataclass
class IntegrandMeta:
    """What the engines need to know about an integrand.

    Attributes
    ----------
    decay_exponent : float
        Exponential rate ``delta`` of the tail (``0`` for oscillatory ones).
    endpoint_log_power : int
        Highest power of ``log t`` at the origin (informational).
    oscillatory : bool
    zero_source : KernelKind, optional
        ``J0`` or ``J1``; partition points are its zeros divided by
        ``zero_scale``.
    zero_scale : float
    tail : callable, optional
        ``tail(T)`` returns the integral over ``(T, inf)``.  When present the
        oscillatory engine integrates up to a cutoff and adds it.
    frequencies : sequence of float
        Oscillation frequencies of the integrand, used to size cells and the
        cutoff of the tail mode.
    """

    decay_exponent: float = 0.0
    endpoint_log_power: int = 0
    oscillatory: bool = False
    zero_source: Optional[KernelKind] = None
    zero_scale: float = 1.0
    tail: Optional[Callable[[float], float]] = None
    frequencies: Sequence[float] = ()
    min_cutoff: float = 0.0


@dataclass
class QuadResult:
    value: float
    err_estimate: float
    evaluations: int
    converged: bool


# ---------------------------------------------------------------------------
# double exponential on (0, inf)


def _level_abscissae(h: float, offset: bool, lo: float, hi: float) -> np.ndarray:
    if offset:
        k = np.arange(math.ceil((lo - h) / (2 * h)), math.floor((hi - h) / (2 * h)) + 1)
        return h + 2 * h * k
    return h * np.arange(math.ceil(lo / h), math.floor(hi / h) + 1)


def _de_nodes(h: float, offset: bool, algebraic: bool):
    """Nodes and weights of one DE level.

    Exponential decay uses ``s = exp(x - exp(-x))``; algebraic decay uses
    ``s = exp(pi/2 sinh x)``.
    """
    if algebraic:
        xs = _level_abscissae(h, offset, -4.0, 4.0)
        arg = 0.5 * np.pi * np.sinh(xs)
        s = np.exp(arg)
        w = s * 0.5 * np.pi * np.cosh(xs)
    else:
        xs = _level_abscissae(h, offset, _DE_X_LO, _DE_X_HI)
        em = np.exp(-xs)
        s = np.exp(xs - em)
        w = s * (1.0 + em)
    keep = (s > 1e-300) & (s < 1e300)
    return s[keep], w[keep]


def integrate_decaying(f: Integrand, meta: IntegrandMeta, rel_tol: float = 1e-13) -> QuadResult:
    """Integrate ``f`` over ``(0, inf)``.

    Parameters
    ----------
    f : callable
        Vectorised integrand; must be finite on ``(0, inf)``.
    meta : IntegrandMeta
        ``decay_exponent`` is the exponential rate of the tail.  Zero selects
        the map for algebraically decaying integrands; the caller is then
        responsible for integrability.
    rel_tol : float
        Target relative accuracy, at least ``1e-14``.

    Notes
    -----
    The error estimate is the difference between the last two levels of
    step halving, which overestimates the error of the finer level because
    the rule converges like ``exp(-c/h)``.
    """
    delta = float(meta.decay_exponent)
    if delta < 0 or not math.isfinite(delta):
        raise QuadratureError("integrand grows exponentially")
    if rel_tol < 1e-14:
        raise ValueError("rel_tol below 1e-14 is not supported")
    algebraic = delta == 0.0
    scale = 1.0 if algebraic else delta
    h = 0.25
    raw = absum = 0.0
    evals = 0
    total = err = math.inf
    for level in range(_MAX_DE_LEVEL):
        s, w = _de_nodes(h, offset=level > 0, algebraic=algebraic)
        with np.errstate(under="ignore"):
            vals = f(s / scale)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("integrand is not finite at a quadrature node")
        evals += s.size
        raw += float(np.dot(w, vals))
        absum += float(np.dot(w, np.abs(vals)))
        new_total = h * raw / scale
        err = abs(new_total - total)
        total = new_total
        floor = 16 * np.finfo(float).eps * h * absum / scale
        if level > 0 and err <= max(rel_tol * abs(total), floor):
            return QuadResult(total, max(err, floor), evals, True)
        h *= 0.5
    return QuadResult(total, err, evals, False)


# ---------------------------------------------------------------------------
# finite intervals


def _ts_nodes(h: float, offset: bool, tau_max: float = 4.0):
    if offset:
        taus = h + 2 * h * np.arange(-math.ceil((tau_max + h) / (2 * h)), math.ceil((tau_max - h) / (2 * h)) + 1)
    else:
        taus = h * np.arange(-math.ceil(tau_max / h), math.ceil(tau_max / h) + 1)
    arg = 0.5 * np.pi * np.sinh(taus)
    x = np.tanh(arg)
    # distance to the nearer endpoint, computed without cancellation
    comp = 1.0 / (np.exp(np.abs(arg)) * np.cosh(arg))
    w = 0.5 * np.pi * np.cosh(taus) / np.cosh(arg) ** 2
    keep = comp > 1e-300
    return x[keep], comp[keep], w[keep]


def integrate_finite(f: Integrand, a: float, b: float, rel_tol: float = 1e-14) -> QuadResult:
    """tanh-sinh quadrature of ``f`` over ``[a, b]``."""
    half = 0.5 * (b - a)

    def mapped(x, comp):
        # evaluate at a + half*(1+x) but keep endpoint resolution
        t = np.where(x < 0, a + half * comp, b - half * comp)
        # nodes that round onto an endpoint carry negligible weight; drop them
        inside = (t != a) & (t != b)
        vals = np.zeros_like(t)
        vals[inside] = f(t[inside])
        return vals

    h = 0.5
    x, comp, w = _ts_nodes(h, False)
    vals = mapped(x, comp)
    raw = float(np.dot(w, vals))
    absum = float(np.dot(w, np.abs(vals)))
    evals = x.size
    total = h * half * raw
    err = math.inf
    for _level in range(1, 8):
        h *= 0.5
        x, comp, w = _ts_nodes(h, True)
        vals = mapped(x, comp)
        evals += x.size
        raw += float(np.dot(w, vals))
        absum += float(np.dot(w, np.abs(vals)))
        new_total = h * half * raw
        err = abs(new_total - total)
        total = new_total
        floor = 16 * np.finfo(float).eps * h * abs(half) * absum
        if err <= max(rel_tol * abs(total), floor):
            return QuadResult(total, max(err, floor), evals, True)
    return QuadResult(total, err, evals, False)


_GL_ORDER = 40
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


def _cell_integrals(f: Integrand, edges: np.ndarray) -> np.ndarray:
    """Gauss-Legendre integrals over consecutive cells [edges[i], edges[i+1]]."""
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    rad = 0.5 * (hi - lo)
    t = mid[:, None] + rad[:, None] * _GL_X[None, :]
    vals = f(t.ravel()).reshape(t.shape)
    return rad * (vals @ _GL_W)


# ---------------------------------------------------------------------------
# sequence acceleration


def accelerate(partial_sums: Sequence[float], depth: int, beta: float = 1.0) -> float:
    """Levin u-transform of a sequence of partial sums.

    Uses the last ``depth + 1`` partial sums and their terms; at least
    ``depth + 2`` entries are required.  Exact (up to rounding) on geometric
    sequences; a constant sequence is returned unchanged.
    """
    s = np.asarray(partial_sums, dtype=float)
    if depth < 1 or s.size < depth + 2:
        raise ValueError("accelerate needs at least depth + 2 partial sums")
    m = s.size - 1
    n0 = m - depth
    num = 0.0
    den = 0.0
    for j in range(depth + 1):
        idx = n0 + j
        a = s[idx] - s[idx - 1]
        if a == 0.0:
            return float(s[-1])
        c = (-1) ** j * math.comb(depth, j) * ((beta + idx) / (beta + m)) ** (depth - 1)
        omega = (beta + idx) * a
        num += c * s[idx] / omega
        den += c / omega
    if den == 0.0 or not math.isfinite(num / den):
        return float(s[-1])
    return num / den


# ---------------------------------------------------------------------------
# oscillatory integrals


def _first_cell(f: Integrand, b: float) -> tuple[float, int]:
    res = integrate_finite(f, 0.0, b, rel_tol=1e-15)
    return res.value, res.evaluations


def integrate_oscillatory(
    f: Integrand,
    meta: IntegrandMeta,
    accel_depth: int = 12,
    rel_tol: float = 1e-9,
) -> QuadResult:
    """Integrate a slowly decaying oscillatory ``f`` over ``(0, inf)``.

    With ``meta.tail`` set, cells are integrated exactly up to a cutoff and
    the tail is added analytically; the error estimate compares two cutoffs.
    Otherwise the partial sums over cells between zeros of
    ``meta.zero_source`` are accelerated with :func:`accelerate`.
    """
    if meta.tail is not None:
        return _oscillatory_with_tail(f, meta, rel_tol)
    if meta.zero_source is None:
        raise ValueError("oscillatory integration needs a zero source or a tail model")
    scale = float(meta.zero_scale)
    n_cells = max(4 * accel_depth, 40)
    evals = 0
    for _attempt in range(4):
        zeros = bessel_j_zeros(meta.zero_source, n_cells) / scale
        head, ev = _first_cell(f, float(zeros[0]))
        evals += ev + _GL_ORDER * (n_cells - 1)
        cells = _cell_integrals(f, zeros)
        sums = head + np.concatenate([[0.0], np.cumsum(cells)])
        est = [accelerate(sums[: m + 1], accel_depth) for m in range(sums.size - 3, sums.size)]
        value = est[-1]
        err = max(abs(est[-1] - est[-2]), abs(est[-1] - est[-3]))
        if err <= rel_tol * max(abs(value), 1e-300):
            return QuadResult(value, err, evals, True)
        n_cells *= 2
    return QuadResult(value, err, evals, False)


def _oscillatory_with_tail(f: Integrand, meta: IntegrandMeta, rel_tol: float) -> QuadResult:
    freqs = [abs(w) for w in meta.frequencies]
    w_max = max(freqs + [1.0])
    cell = min(2.0, 10.0 / w_max)
    nonzero = [w for w in freqs if w > 1e-9]
    cutoff = max(meta.min_cutoff, 40.0 / min(nonzero) if nonzero else 40.0, 40.0)
    if nonzero and min(nonzero) < 0.05:
        raise QuadratureError("frequency too close to zero for the asymptotic tail")
    n_total = int(math.ceil(1.3 * cutoff / cell)) + 1
    edges = cell * np.arange(n_total + 1)
    head, evals = _first_cell(f, edges[1])
    cells = _cell_integrals(f, edges[1:])
    evals += cells.size * _GL_ORDER
    sums = head + np.concatenate([[0.0], np.cumsum(cells)])
    i1 = int(math.ceil(cutoff / cell))
    i2 = n_total
    v1 = sums[i1 - 1] + meta.tail(float(edges[i1]))
    v2 = sums[i2 - 1] + meta.tail(float(edges[i2]))
    err = abs(v2 - v1) + 1e-16 * float(np.sum(np.abs(cells)))
    return QuadResult(v2, err, evals, err <= rel_tol * max(abs(v2), 1e-300))


# ---------------------------------------------------------------------------
# products of J kernels and their asymptotic tails

_HANKEL_TERMS = 30
_HALF_TERMS = 2 * _HANKEL_TERMS

# factor kinds: 0 -> J0(c t), 1 -> J1(c t), ONE_MINUS_J0 -> 1 - J0(c t)
ONE_MINUS_J0 = -1


def _one_minus_j0(x: np.ndarray) -> np.ndarray:
    out = 1.0 - j0(x)
    small = np.abs(x) < 1.0
    if np.any(small):
        q = -0.25 * x[small] ** 2
        term = -q
        acc = term.copy()
        for k in range(2, 30):
            term = term * q / (k * k)
            acc += term
        out[small] = acc
    return out


def _hankel_coefficients(kind: int, scale: float) -> dict[float, np.ndarray]:
    """Expansion ``sum_w exp(i w t) sum_h coef[h] t**(-h/2)`` of one factor."""
    nu = 0 if kind == ONE_MINUS_J0 else kind
    plus = np.zeros(_HALF_TERMS, dtype=complex)
    pref = math.sqrt(2.0 / (math.pi * scale)) * np.exp(-1j * (0.5 * nu + 0.25) * math.pi)
    term = 1.0
    mu = 4.0 * nu * nu
    for k in range(_HANKEL_TERMS - 1):
        if k > 0:
            term *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
        plus[2 * k + 1] = 0.5 * pref * (1j) ** k * term / scale**k
    out = {scale: plus, -scale: np.conj(plus)}
    if kind == ONE_MINUS_J0:
        one = np.zeros(_HALF_TERMS, dtype=complex)
        one[0] = 1.0
        out = {scale: -plus, -scale: -np.conj(plus), 0.0: one}
    return out


def _falling(alpha: float, r_max: int):
    """P_r = prod_{i<r} (-alpha - i) and its alpha-derivative."""
    p = np.empty(r_max)
    dp = np.empty(r_max)
    p[0], dp[0] = 1.0, 0.0
    for r in range(1, r_max):
        p[r] = p[r - 1] * (-alpha - r + 1)
        dp[r] = dp[r - 1] * (-alpha - r + 1) - p[r - 1]
    return p, dp


def _tail_power(omega: float, alpha: float, log_power: int, big_t: float) -> complex:
    """int_T^inf exp(i omega t) t**-alpha (log t)**log_power dt."""
    log_t = math.log(big_t)
    if omega == 0.0:
        if alpha <= 1.0:
            raise QuadratureError("non-oscillatory tail is not integrable")
        base = big_t ** (1.0 - alpha) / (alpha - 1.0)
        if log_power == 0:
            return complex(base)
        return complex(base * (log_t + 1.0 / (alpha - 1.0)))
    r_max = 80
    p, dp = _falling(alpha, r_max)
    iw = 1j * omega
    total = 0.0 + 0.0j
    prev = math.inf
    tpow = big_t ** (-alpha)
    fac = 1.0 / iw
    for r in range(r_max):
        deriv = p[r] if log_power == 0 else p[r] * log_t - dp[r]
        term = (-1) ** r * deriv * tpow * fac
        mag = abs(term)
        if mag > prev:
            break
        total += term
        if mag <= 1e-18 * abs(total):
            break
        prev = mag
        tpow /= big_t
        fac /= iw
    return -np.exp(iw * big_t) * total


@dataclass(frozen=True)
class JTerm:
    """``coef * t**power * log(t)**log_power * prod F(c t)``.

    Each factor is ``(kind, c)`` with kind ``0`` (``J0``), ``1`` (``J1``) or
    :data:`ONE_MINUS_J0`.
    """

    coef: float
    factors: tuple[tuple[int, float], ...]
    power: float = 0.0
    log_power: int = 0

    def __call__(self, t: np.ndarray) -> np.ndarray:
        out = np.full_like(t, self.coef, dtype=float)
        for kind, c in self.factors:
            if kind == ONE_MINUS_J0:
                out = out * _one_minus_j0(c * t)
            else:
                out = out * (j0(c * t) if kind == 0 else j1(c * t))
        if self.power:
            out = out * t**self.power
        if self.log_power:
            out = out * np.log(t) ** self.log_power
        return out

    def expansion(self) -> dict[float, np.ndarray]:
        start = np.zeros(_HALF_TERMS, dtype=complex)
        start[0] = self.coef
        series: dict[float, np.ndarray] = {0.0: start}
        for kind, c in self.factors:
            fac = _hankel_coefficients(kind, c)
            nxt: dict[float, np.ndarray] = defaultdict(lambda: np.zeros(_HALF_TERMS, dtype=complex))
            for w1, s1 in series.items():
                for w2, s2 in fac.items():
                    key = round(w1 + w2, 11) + 0.0
                    nxt[key] += np.convolve(s1, s2)[:_HALF_TERMS]
            series = dict(nxt)
        return series

    def tail(self, big_t: float) -> float:
        total = 0.0 + 0.0j
        for omega, coefs in self.expansion().items():
            for h, g in enumerate(coefs):
                if abs(g) < 1e-300:
                    continue
                total += g * _tail_power(omega, 0.5 * h - self.power, self.log_power, big_t)
        return float(total.real)

    def frequencies(self) -> list[float]:
        return [w for w, c in self.expansion().items() if np.any(np.abs(c) > 0)]


@dataclass
class JProductSum:
    """A finite sum of :class:`JTerm` objects, integrable over ``(0, inf)``."""

    terms: list[JTerm] = field(default_factory=list)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            out += term(t)
        return out

    def tail(self, big_t: float) -> float:
        return sum(term.tail(big_t) for term in self.terms)

    def meta(self) -> IntegrandMeta:
        freqs = sorted({abs(w) for term in self.terms for w in term.frequencies()})
        scales = [c for term in self.terms for _, c in term.factors]
        return IntegrandMeta(
            oscillatory=True,
            tail=self.tail,
            frequencies=freqs,
            min_cutoff=25.0 / min(scales) if scales else 0.0,
        )

    def integrate(self, rel_tol: float = 1e-12) -> QuadResult:
        return integrate_oscillatory(self, self.meta(), rel_tol=rel_tol)
