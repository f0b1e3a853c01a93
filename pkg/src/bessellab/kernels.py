"""Modified and ordinary Bessel kernels of order 0 and 1.

All evaluators are vectorised over numpy arrays and come in exponentially
scaled variants so that long products such as ``I0(t)**a * K0(t)**b`` can be
formed without overflow:

* ``i0e(t) = I0(t) exp(-t)``, ``i1e(t) = I1(t) exp(-t)``
* ``k0e(t) = K0(t) exp(t)``,  ``k1e(t) = K1(t) exp(t)``

Evaluation regions
------------------
``I``: ascending series for ``t < 20``, Hankel-type asymptotic series beyond.
``K``: logarithmic ascending series for ``t < 1``, trapezoidal rule on the
integral ``exp(t) K_nu(t) = int_0^inf exp(-t (cosh s - 1)) cosh(nu s) ds``
for ``1 <= t < 20``, asymptotic series beyond.
``J``: ascending series for ``t < 2``, periodic trapezoidal rule on Bessel's
integral for ``2 <= t < 25``, Hankel expansion beyond.

The seams are deliberately placed where both neighbouring methods are accurate
to a few ulps, and the test-suite checks agreement across every seam.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.57721566490153286060651209008240243

_I_SEAM = 20.0
_K_SERIES_SEAM = 1.0
_K_ASYM_SEAM = 20.0
_J_SERIES_SEAM = 2.0
_J_ASYM_SEAM = 25.0
_UNSCALED_I_LIMIT = 700.0
_EPS = 2.0 ** -56


class KernelKind(enum.Enum):
    I0 = "I0"
    I1 = "I1"
    K0 = "K0"
    K1 = "K1"
    J0 = "J0"
    J1 = "J1"

    @property
    def order(self) -> int:
        return int(self.value[1])

    @property
    def family(self) -> str:
        return self.value[0]


class Scaling(enum.Enum):
    """Exponential factor folded into a returned kernel value."""

    NONE = "none"
    TIMES_EXP_MINUS_T = "exp(-t)"  # natural for I
    TIMES_EXP_PLUS_T = "exp(+t)"  # natural for K


@dataclass(frozen=True)
class ScaledValue:
    value: float
    scaling: Scaling

    def unscaled(self, t: float) -> float:
        if self.scaling is Scaling.NONE:
            return self.value
        if self.scaling is Scaling.TIMES_EXP_MINUS_T:
            return self.value * math.exp(t)
        return self.value * math.exp(-t)


# ---------------------------------------------------------------------------
# series helpers (x is a 1-d float array, all entries inside the region)


def _i_series(x: np.ndarray, nu: int) -> np.ndarray:
    q = 0.25 * x * x
    term = np.ones_like(x) if nu == 0 else 0.5 * x
    total = term.copy()
    for k in range(1, 200):
        term = term * q / (k * (k + nu))
        total += term
        if np.all(term <= _EPS * total):
            break
    return total


def _asym_series(x: np.ndarray, nu: int, sign: float) -> np.ndarray:
    """sum_k sign**k a_k(nu) / x**k truncated at the first negligible term."""
    mu = 4.0 * nu * nu
    term = np.ones_like(x)
    total = term.copy()
    for k in range(1, 60):
        term = term * sign * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        total += term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    return total


def _i_scaled(x: np.ndarray, nu: int) -> np.ndarray:
    out = np.empty_like(x)
    small = x < _I_SEAM
    if np.any(small):
        xs = x[small]
        out[small] = _i_series(xs, nu) * np.exp(-xs)
    if np.any(~small):
        xl = x[~small]
        out[~small] = _asym_series(xl, nu, -1.0) / np.sqrt(2.0 * np.pi * xl)
    return out


# trapezoid nodes for the K integral representation
_K_TRAP_H = 0.1
_K_TRAP_S = np.arange(0.0, 6.0 + 0.5 * _K_TRAP_H, _K_TRAP_H)
_K_TRAP_W = np.full_like(_K_TRAP_S, _K_TRAP_H)
_K_TRAP_W[0] *= 0.5
_K_TRAP_CM1 = 2.0 * np.sinh(0.5 * _K_TRAP_S) ** 2  # cosh(s) - 1 without cancellation
_K_TRAP_COSH = np.cosh(_K_TRAP_S)


def _k_trapezoid(x: np.ndarray, nu: int) -> np.ndarray:
    weights = _K_TRAP_W if nu == 0 else _K_TRAP_W * _K_TRAP_COSH
    return np.exp(-np.outer(x, _K_TRAP_CM1)) @ weights


def _harmonic(n: int) -> float:
    return sum(1.0 / j for j in range(1, n + 1))


def _k_series(x: np.ndarray, nu: int) -> np.ndarray:
    """Unscaled K_nu from the logarithmic ascending series (x < ~2)."""
    q = 0.25 * x * x
    log_half = np.log(0.5 * x)
    if nu == 0:
        term = np.ones_like(x)
        acc = np.zeros_like(x)
        for k in range(1, 60):
            term = term * q / (k * k)
            add = term * _harmonic(k)
            acc += add
            if np.all(add <= _EPS * np.abs(acc)):
                break
        return -(log_half + EULER_GAMMA) * _i_series(x, 0) + acc
    # nu == 1
    term = np.ones_like(x)
    psi_sum = -2.0 * EULER_GAMMA + 1.0  # psi(1) + psi(2)
    acc = psi_sum * term
    for k in range(1, 60):
        term = term * q / (k * (k + 1))
        psi_sum += 1.0 / k + 1.0 / (k + 1)
        add = psi_sum * term
        acc += add
        if np.all(np.abs(add) <= _EPS * np.abs(acc)):
            break
    return 1.0 / x + log_half * _i_series(x, 1) - 0.25 * x * acc


def _k_scaled(x: np.ndarray, nu: int) -> np.ndarray:
    out = np.empty_like(x)
    small = x < _K_SERIES_SEAM
    large = x >= _K_ASYM_SEAM
    mid = ~(small | large)
    if np.any(small):
        xs = x[small]
        out[small] = _k_series(xs, nu) * np.exp(xs)
    if np.any(mid):
        out[mid] = _k_trapezoid(x[mid], nu)
    if np.any(large):
        xl = x[large]
        out[large] = _asym_series(xl, nu, 1.0) * np.sqrt(0.5 * np.pi / xl)
    return out


_J_TRAP_N = 72
_J_TRAP_THETA = np.pi * np.arange(_J_TRAP_N // 2 + 1) / (_J_TRAP_N // 2)
_J_TRAP_W = np.full(_J_TRAP_N // 2 + 1, 1.0 / (_J_TRAP_N // 2))
_J_TRAP_W[[0, -1]] *= 0.5


def _j_series(x: np.ndarray, nu: int) -> np.ndarray:
    q = -0.25 * x * x
    term = np.ones_like(x) if nu == 0 else 0.5 * x
    total = term.copy()
    for k in range(1, 80):
        term = term * q / (k * (k + nu))
        total += term
        if np.all(np.abs(term) <= _EPS * 1e-2):
            break
    return total


def _j_trapezoid(x: np.ndarray, nu: int) -> np.ndarray:
    phase = nu * _J_TRAP_THETA[None, :] - np.outer(x, np.sin(_J_TRAP_THETA))
    return np.cos(phase) @ _J_TRAP_W


def _j_hankel(x: np.ndarray, nu: int) -> np.ndarray:
    mu = 4.0 * nu * nu
    term = np.ones_like(x)
    p = term.copy()
    q = np.zeros_like(x)
    for k in range(1, 80):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        # i**k a_k(nu) / x**k split into real (even k) and imaginary (odd k)
        if k % 2 == 0:
            p += term if k % 4 == 0 else -term
        else:
            q += term if k % 4 == 1 else -term
        if np.all(np.abs(term) <= _EPS * 1e-2):
            break
    phi = (0.5 * nu + 0.25) * np.pi
    c, s = np.cos(x), np.sin(x)
    cos_chi = c * math.cos(phi) + s * math.sin(phi)
    sin_chi = s * math.cos(phi) - c * math.sin(phi)
    return np.sqrt(2.0 / (np.pi * x)) * (p * cos_chi - q * sin_chi)


def _j_abs(x: np.ndarray, nu: int) -> np.ndarray:
    out = np.empty_like(x)
    r1 = x < _J_SERIES_SEAM
    r3 = x >= _J_ASYM_SEAM
    r2 = ~(r1 | r3)
    if np.any(r1):
        out[r1] = _j_series(x[r1], nu)
    if np.any(r2):
        out[r2] = _j_trapezoid(x[r2], nu)
    if np.any(r3):
        out[r3] = _j_hankel(x[r3], nu)
    return out


# ---------------------------------------------------------------------------
# public vectorised evaluators


def _as_array(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    return np.atleast_1d(arr).ravel(), arr.ndim == 0


def _shape_like(values: np.ndarray, t, scalar: bool):
    if scalar:
        return float(values[0])
    return values.reshape(np.shape(t))


def _check_positive(x: np.ndarray, allow_zero: bool) -> None:
    bad = (x < 0) if allow_zero else (x <= 0)
    if np.any(bad) or np.any(~np.isfinite(x)):
        raise ValueError("Bessel kernel argument out of domain")


def i0e(t):
    """``I0(t) exp(-t)`` for ``t >= 0``."""
    x, scalar = _as_array(t)
    _check_positive(x, allow_zero=True)
    return _shape_like(_i_scaled(x, 0), t, scalar)


def i1e(t):
    """``I1(t) exp(-t)`` for ``t >= 0``."""
    x, scalar = _as_array(t)
    _check_positive(x, allow_zero=True)
    return _shape_like(_i_scaled(x, 1), t, scalar)


def k0e(t):
    """``K0(t) exp(t)`` for ``t > 0``."""
    x, scalar = _as_array(t)
    _check_positive(x, allow_zero=False)
    return _shape_like(_k_scaled(x, 0), t, scalar)


def k1e(t):
    """``K1(t) exp(t)`` for ``t > 0``."""
    x, scalar = _as_array(t)
    _check_positive(x, allow_zero=False)
    return _shape_like(_k_scaled(x, 1), t, scalar)


def j0(t):
    """Bessel ``J0`` (even, any real argument)."""
    x, scalar = _as_array(t)
    if np.any(~np.isfinite(x)):
        raise ValueError("Bessel kernel argument out of domain")
    return _shape_like(_j_abs(np.abs(x), 0), t, scalar)


def j1(t):
    """Bessel ``J1`` (odd, any real argument)."""
    x, scalar = _as_array(t)
    if np.any(~np.isfinite(x)):
        raise ValueError("Bessel kernel argument out of domain")
    return _shape_like(np.sign(x) * _j_abs(np.abs(x), 1), t, scalar)


_SCALED = {KernelKind.I0: i0e, KernelKind.I1: i1e, KernelKind.K0: k0e, KernelKind.K1: k1e}


def eval_kernel(kind: KernelKind, t: float, scaling: Scaling = Scaling.NONE) -> ScaledValue:
    """Evaluate one kernel at a scalar point.

    Parameters
    ----------
    kind : KernelKind
    t : float
        ``t > 0`` for ``K``, ``t >= 0`` for ``I``, any real for ``J``.
    scaling : Scaling
        ``TIMES_EXP_MINUS_T`` is only meaningful for ``I`` kernels and
        ``TIMES_EXP_PLUS_T`` only for ``K`` kernels.

    Raises
    ------
    ValueError
        Outside the domain, for a mismatched scaling, or when an unscaled
        ``I`` value would overflow (``t > 700``).
    """
    t = float(t)
    if kind.family == "J":
        if scaling is not Scaling.NONE:
            raise ValueError("J kernels are never scaled")
        fn = j0 if kind is KernelKind.J0 else j1
        return ScaledValue(fn(t), Scaling.NONE)
    fn = _SCALED[kind]
    natural = Scaling.TIMES_EXP_MINUS_T if kind.family == "I" else Scaling.TIMES_EXP_PLUS_T
    if scaling not in (Scaling.NONE, natural):
        raise ValueError(f"scaling {scaling.value} does not apply to {kind.value}")
    if kind.family == "I" and scaling is Scaling.NONE and t > _UNSCALED_I_LIMIT:
        raise ValueError("unscaled I kernel overflows; request TIMES_EXP_MINUS_T")
    val = fn(t)
    if scaling is Scaling.NONE:
        val = val * math.exp(t) if kind.family == "I" else val * math.exp(-t)
    return ScaledValue(val, scaling)


def gamma_fn(x: float) -> float:
    """Euler's Gamma for ``x > 0`` (wraps :func:`math.gamma`)."""
    if not x > 0:
        raise ValueError("gamma_fn requires x > 0")
    return math.gamma(x)


# ---------------------------------------------------------------------------
# zeros of J0 / J1

_ZERO_LOCK = threading.Lock()
_ZERO_TABLE: dict[KernelKind, list[float]] = {KernelKind.J0: [], KernelKind.J1: []}


def _mcmahon(nu: int, m: int) -> float:
    beta = (m + 0.5 * nu - 0.25) * math.pi
    mu = 4.0 * nu * nu
    b8 = 8.0 * beta
    return (
        beta
        - (mu - 1) / b8
        - 4 * (mu - 1) * (7 * mu - 31) / (3 * b8**3)
        - 32 * (mu - 1) * (83 * mu**2 - 982 * mu + 3779) / (15 * b8**5)
    )


def _polish_zero(nu: int, x: float) -> float:
    for _ in range(50):
        if nu == 0:
            f = j0(x)
            fp = -j1(x)
        else:
            f = j1(x)
            fp = j0(x) - f / x
        step = f / fp
        x -= step
        if abs(step) <= 4e-16 * x:
            break
    return x


def bessel_j_zeros(kind: KernelKind, count: int) -> np.ndarray:
    """First ``count`` positive zeros of ``J0`` or ``J1`` (memoised)."""
    if kind not in (KernelKind.J0, KernelKind.J1):
        raise ValueError("zeros are tabulated for J0 and J1 only")
    nu = kind.order
    with _ZERO_LOCK:
        table = _ZERO_TABLE[kind]
        while len(table) < count:
            m = len(table) + 1
            table.append(_polish_zero(nu, _mcmahon(nu, m)))
        return np.array(table[:count])


def bessel_j_zero(kind: KernelKind, m: int) -> float:
    """The ``m``-th positive zero (``m >= 1``) of ``J0`` or ``J1``."""
    if m < 1:
        raise ValueError("zero index starts at 1")
    return float(bessel_j_zeros(kind, m)[-1])
