"""Mahler measures, random-walk integrals and two eta-product L-values.

Mahler measures of ``1 + x_1 + ... + x_{n-1}`` come from the Bessel integral

    m_n = -gamma + log 2 - n int_0^inf J1(t) J0(t)^(n-1) log t dt,

integrated cell by cell with an asymptotic tail.  L-values are direct
Dirichlet sums of exact integer q-expansions with a rigorous tail bound.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .kernels import EULER_GAMMA, gamma_fn
from .quadrature import JProductSum, JTerm, ONE_MINUS_J0, QuadratureError
from .reports import CheckReport, Timer, failed_report, make_report

LOG2 = 0.69314718055994530941723212145817657
OSC_TOL = 1e-10


@dataclass(frozen=True)
class Constants:
    euler_gamma: float = EULER_GAMMA
    log2: float = LOG2


def brute_force_euler_gamma(n: int = 10**7) -> float:
    """``H_n - log n - 1/(2n)``; agrees with gamma to about ``1/(12 n^2)``."""
    k = np.arange(1, n + 1, dtype=float)
    harmonic = math.fsum(1.0 / k)
    return harmonic - math.log(n) - 0.5 / n


# ---------------------------------------------------------------------------
# J-integrals


def j_product_integral(
    factors: tuple[tuple[int, float], ...],
    power: float = 0.0,
    log_power: int = 0,
    coef: float = 1.0,
    rel_tol: float = OSC_TOL,
) -> float:
    """``coef int_0^inf t**power log(t)**log_power prod F(c t) dt``.

    ``factors`` uses the conventions of :class:`bessellab.quadrature.JTerm`.
    """
    res = JProductSum([JTerm(coef, tuple(factors), power, log_power)]).integrate(rel_tol)
    if not res.converged:
        raise QuadratureError(f"J-integral did not reach rel_tol {rel_tol:g} (err {res.err_estimate:.1e})")
    return res.value


@lru_cache(maxsize=None)
def mahler_linear(n: int, rel_tol: float = OSC_TOL) -> float:
    """``m(1 + x_1 + ... + x_{n-1})`` for ``2 <= n <= 6``."""
    if not 2 <= n <= 6:
        raise ValueError("mahler_linear supports 2 <= n <= 6")
    integral = j_product_integral(((1, 1.0),) + ((0, 1.0),) * (n - 1), 0.0, 1, 1.0, rel_tol)
    return -EULER_GAMMA + LOG2 - n * integral


def mahler_difference(n: int = 4, rel_tol: float = OSC_TOL) -> float:
    """``int_0^inf (1 - J0(t)) / t J0(t)^n dt``, which equals ``m_{n+1} - m_n``."""
    return j_product_integral(((ONE_MINUS_J0, 1.0),) + ((0, 1.0),) * n, -1.0, 0, 1.0, rel_tol)


def kluyver_p(n: int, x: float, rel_tol: float = OSC_TOL) -> float:
    """Density of the distance after ``n`` unit steps: ``int J0(x t) J0(t)^n x t dt``."""
    if n < 2:
        raise ValueError("kluyver_p needs n >= 2")
    if not 0 < x < n:
        raise ValueError("kluyver_p needs 0 < x < n")
    return j_product_integral(((0, float(x)),) + ((0, 1.0),) * n, 1.0, 0, float(x), rel_tol)


def ramble_w(n: int, s: float, rel_tol: float = OSC_TOL) -> float:
    """``s``-th moment of the distance after ``n`` unit steps, ``0 < s < 2``.

    Uses ``d/dx J0^n = -n J1 J0^(n-1)``.
    """
    if n < 1:
        raise ValueError("ramble_w needs n >= 1")
    if not 0 < s < 2:
        raise ValueError("ramble_w needs 0 < s < 2")
    pref = 2.0**s * gamma_fn(1 + s / 2) / gamma_fn(1 - s / 2)
    integral = j_product_integral(((1, 1.0),) + ((0, 1.0),) * (n - 1), -float(s), 0, float(n), rel_tol)
    return pref * integral


def ramble_monte_carlo(n: int, s: float, samples: int = 10**7, seed: int = 0, chunk: int = 10**6) -> tuple[float, float]:
    """Monte Carlo mean and standard error of ``|sum exp(2 pi i t_k)|^s``."""
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        theta = rng.random((m, n)) * (2 * math.pi)
        r = np.abs(np.exp(1j * theta).sum(axis=1)) ** s
        total += float(r.sum())
        total_sq += float((r * r).sum())
        done += m
    mean = total / samples
    var = total_sq / samples - mean * mean
    return mean, math.sqrt(max(var, 0.0) / samples)


# ---------------------------------------------------------------------------
# eta products


class FormName(str, enum.Enum):
    F_3_15 = "f_3_15"
    F_4_6 = "f_4_6"


@dataclass(frozen=True)
class EtaProductForm:
    """Sum of eta products; each summand is a tuple of (multiplier, exponent)."""

    name: FormName
    weight: int
    level: int
    components: tuple[tuple[tuple[int, int], ...], ...]


F_3_15 = EtaProductForm(FormName.F_3_15, 3, 15, (((3, 3), (5, 3)), ((1, 3), (15, 3))))
F_4_6 = EtaProductForm(FormName.F_4_6, 4, 6, (((1, 2), (2, 2), (3, 2), (6, 2)),))
FORMS = {f.name.value: f for f in (F_3_15, F_4_6)}

Q_SERIES_MAX = 10**6


@dataclass(frozen=True)
class QSeries:
    """Coefficients ``a_1..a_N`` (``coefficients[i]`` is ``a_{i+1}``)."""

    coefficients: np.ndarray
    N: int

    def a(self, n: int) -> int:
        return int(self.coefficients[n - 1])


def _euler_sparse(m: int, limit: int) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero terms of ``prod (1 - q^(m n))`` up to degree ``limit`` (pentagonal numbers)."""
    exps, coefs = [0], [1]
    k = 1
    while True:
        added = False
        for g in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            if m * g <= limit:
                exps.append(m * g)
                coefs.append(-1 if k % 2 else 1)
                added = True
        if not added:
            break
        k += 1
    return np.array(exps, dtype=np.int64), np.array(coefs, dtype=np.int64)


def _euler_cubed_sparse(m: int, limit: int) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero terms of ``prod (1 - q^(m n))^3`` (Jacobi's identity)."""
    exps, coefs = [], []
    k = 0
    while m * k * (k + 1) // 2 <= limit:
        exps.append(m * k * (k + 1) // 2)
        coefs.append((-1) ** k * (2 * k + 1))
        k += 1
    return np.array(exps, dtype=np.int64), np.array(coefs, dtype=np.int64)


_OVERFLOW_GUARD = 2**62


def _times_sparse(dense: np.ndarray, exps: np.ndarray, coefs: np.ndarray) -> np.ndarray:
    out = np.zeros_like(dense)
    size = dense.size
    bound = int(np.max(np.abs(dense))) * int(np.sum(np.abs(coefs)))
    if bound >= _OVERFLOW_GUARD:
        raise OverflowError("q-series coefficients exceed the int64 range")
    for e, c in zip(exps.tolist(), coefs.tolist()):
        if e >= size:
            continue
        out[e:] += c * dense[: size - e]
    return out


def eta_q_expansion(form: EtaProductForm | str, N: int) -> QSeries:
    """Exact integer coefficients ``a_1..a_N`` of an eta-product form."""
    if isinstance(form, str):
        form = FORMS[form]
    if not 1 <= N <= Q_SERIES_MAX:
        raise ValueError(f"N must lie in 1..{Q_SERIES_MAX}")
    total = np.zeros(N + 1, dtype=np.int64)
    for summand in form.components:
        num = sum(m * e for m, e in summand)
        if num % 24:
            raise ValueError("eta product has a fractional leading exponent")
        shift = num // 24
        if shift > N:
            continue
        limit = N - shift
        series = np.zeros(limit + 1, dtype=np.int64)
        series[0] = 1
        for m, e in summand:
            for _ in range(e // 3):
                series = _times_sparse(series, *_euler_cubed_sparse(m, limit))
            for _ in range(e % 3):
                series = _times_sparse(series, *_euler_sparse(m, limit))
        total[shift:] += series
    coefs = total[1:].copy()
    if total[0] != 0:
        raise ValueError("form is not a cusp form")
    return QSeries(coefs, N)


def divisor_counts(N: int) -> np.ndarray:
    """``d(n)`` for ``n = 1..N``."""
    d = np.zeros(N + 1, dtype=np.int64)
    for k in range(1, N + 1):
        d[k::k] += 1
    return d[1:]


def dirichlet_tail_bound(weight: int, s: float, N: int) -> float:
    """Upper bound for ``sum_{n>N} d(n) n^((weight-1)/2 - s)``.

    Partial summation with ``sum_{n<=x} d(n) <= x (log x + 1)``.
    """
    sigma = s - 0.5 * (weight - 1)
    if sigma <= 1:
        raise ValueError("Dirichlet series is not absolutely convergent")
    log_n = math.log(N)
    return sigma * N ** (1 - sigma) * ((log_n + 1) / (sigma - 1) + 1 / (sigma - 1) ** 2)


@dataclass(frozen=True)
class LValue:
    form: str
    s: int
    value: float
    N: int
    tail_bound: float
    half_sum: float  # partial sum with N // 2 terms


def _n_for_tail(weight: int, s: int, target: float) -> int:
    n = 1000
    while dirichlet_tail_bound(weight, s, n) > target:
        n *= 2
        if n > Q_SERIES_MAX:
            raise ArithmeticError("tail bound cannot be met within the q-series limit")
    return n


@lru_cache(maxsize=None)
def l_value(form: str | FormName, s: int, target: float = 1e-10) -> LValue:
    """``L(f, s) = sum a_n n^-s`` for ``s`` past the edge of absolute convergence."""
    form = FORMS[FormName(form).value]
    if s <= form.weight:
        raise ValueError("l_value needs s > weight")
    N = _n_for_tail(form.weight, s, target)
    q = eta_q_expansion(form, N)
    a = q.coefficients.astype(float)
    d = divisor_counts(N).astype(float)
    n = np.arange(1, N + 1, dtype=float)
    if np.any(np.abs(a) > d * n ** (0.5 * (form.weight - 1)) * (1 + 1e-12)):
        raise ArithmeticError("coefficient exceeds the divisor bound; tail bound invalid")
    terms = a / n**s
    value = math.fsum(terms)
    half = math.fsum(terms[: N // 2])
    return LValue(form.name.value, s, value, N, dirichlet_tail_bound(form.weight, s, N), half)


# ---------------------------------------------------------------------------
# consistency checks


def known_mahler_checks(tol: float = 1e-8) -> list[CheckReport]:
    """``m_2 = 0``, ``m_3 = sqrt3 V_3 / pi`` and ``m_4 = 4 V_4 / pi^2``."""
    from .moments import vacuum

    out = []
    for n, rhs_fn in (
        (2, lambda: 0.0),
        (3, lambda: math.sqrt(3) * vacuum(3) / math.pi),
        (4, lambda: 4 * vacuum(4) / math.pi**2),
    ):
        timer = Timer()
        try:
            out.append(make_report(f"mahler-m{n}", "mahler-known", mahler_linear(n), rhs_fn(), tol, timer.ms))
        except QuadratureError:
            out.append(failed_report(f"mahler-m{n}", "mahler-known", tol, timer.ms))
    return out


def mahler_difference_check(tol: float = 1e-7) -> CheckReport:
    timer = Timer()
    return make_report(
        "mahler-difference-m5-m4", "mahler-difference", mahler_difference(4), mahler_linear(5) - mahler_linear(4), tol, timer.ms
    )


def kluyver_checks(u_values=(0.25, 0.5, 0.75), tol: float = 1e-7) -> list[CheckReport]:
    """``p_4``, ``p_5`` against the two-scale moments."""
    from .moments import iv, kv

    out = []
    for u in u_values:
        r = math.sqrt(u)
        timer = Timer()
        lhs = kluyver_p(4, r) / r
        rhs = 6 / math.pi**4 * (iv(1, 4, 1, u, rel_tol=1e-12) + 4 * kv(1, 4, 1, u, rel_tol=1e-12))
        out.append(make_report(f"kluyver-p4-u{u:g}", "kluyver-two-scale", lhs, rhs, tol, timer.ms))
        timer = Timer()
        lhs = kluyver_p(5, r) / r
        rhs = 30 * iv(2, 4, 1, u, rel_tol=1e-12) / math.pi**4
        out.append(make_report(f"kluyver-p5-u{u:g}", "kluyver-two-scale", lhs, rhs, tol, timer.ms))
    return out


def lvalue_tail_checks() -> list[CheckReport]:
    """Partial sums with ``N/2`` and ``N`` terms agree within the ``N/2`` tail bound."""
    out = []
    for name, s in (("f_3_15", 4), ("f_4_6", 5)):
        timer = Timer()
        lv = l_value(name, s)
        form = FORMS[name]
        bound = dirichlet_tail_bound(form.weight, s, lv.N // 2)
        out.append(make_report(f"lvalue-{name}-{s}-tail", "lvalue-tail", lv.half_sum, lv.value, bound, timer.ms))
    return out


CONJECTURE_CONSTANTS = {
    "det-Mcheck2": lambda L: 45 / (8 * math.pi**2) * L,
    "det-Ncheck2": lambda L: 27 / (4 * math.pi**2) * L,
    "m5": lambda L: 6 * (math.sqrt(15) / (2 * math.pi)) ** 5 * L,
    "m6": lambda L: 3 * (math.sqrt(6) / math.pi) ** 6 * L,
}


def conjecture_checks(tol: float = 1e-7) -> list[CheckReport]:
    """Numerical consistency of the L-value conjectures; never gating."""
    from .determinants import MatrixKind, build_matrix

    l5 = l_value("f_3_15", 4).value
    l6 = l_value("f_4_6", 5).value
    items = (
        ("det-Mcheck2", "conjecture-lvalue-det", lambda: build_matrix(MatrixKind.MCHECK2, 2).det(), l5),
        ("det-Ncheck2", "conjecture-lvalue-det", lambda: build_matrix(MatrixKind.NCHECK2, 2).det(), l6),
        ("m5", "conjecture-lvalue-mahler", lambda: mahler_linear(5), l5),
        ("m6", "conjecture-lvalue-mahler", lambda: mahler_linear(6), l6),
    )
    out = []
    for key, tag, lhs_fn, L in items:
        timer = Timer()
        try:
            lhs = lhs_fn()
        except QuadratureError:
            out.append(failed_report(f"conjecture-{key}", tag, tol, timer.ms, conjecture=True))
            continue
        out.append(make_report(f"conjecture-{key}", tag, lhs, CONJECTURE_CONSTANTS[key](L), tol, timer.ms, conjecture=True))
    return out
