"""Check records shared by the verification suites and the command line.

Every :class:`CheckReport` carries a ``paper_ref`` tag that must be a key of
:data:`REGISTRY`; the registry value is a one-line description of the
identity being checked.
"""

from __future__ import annotations

import enum
import math
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass


class Status(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    WARN = "WARN"
    CONJECTURE_CONSISTENT = "CONJECTURE_CONSISTENT"
    CONJECTURE_INCONSISTENT = "CONJECTURE_INCONSISTENT"


REGISTRY: dict[str, str] = {
    "moment-closed-form": "single Bessel moment against its classical closed form",
    "det-m-product": "det M_k against the product formula in pi and odd powers",
    "det-n-product": "det N_k against the product formula with Gamma((k+1)/2)",
    "det-m-recursion": "det M_{k-1} det M_k against (det N_{k-1})^2 times a rational product",
    "det-n-recursion": "det N_{k-1} det N_k against (det M_k)^2 times a rational product",
    "wronskian-omega-odd": "odd Wronskian Omega_{2k-1}(u) against its algebraic closed form",
    "wronskian-omega-even": "even Wronskian omega_{2k}(u) against its algebraic closed form",
    "wronskian-sign": "sign of omega_{2k}(u) on (0, 1)",
    "wronskian-endpoint": "limit of (1-u)^2 omega_4(u) at u = 1 against det N_1 det N_2",
    "factorization-at-one": "Omega_{2k-1}(1) as a product of two Broadhurst-Mellit determinants",
    "vacuum-factorization-at-one": "vacuum Wronskian at u = 1 as IKM(1,2;1) det of the vacuum 2x2 matrix",
    "vacuum-psi2": "2x2 Wronskian of IvKM(2,3;1|u), IKvM(2,3;1|u) against a Kluyver density",
    "vacuum-psi3": "3x3 Wronskian of the 6-kernel two-scale moments against a Kluyver density",
    "vacuum-omega3": "vacuum Wronskian with 5 kernels against its J-integral representation",
    "vacuum-omega4": "vacuum Wronskian with 6 kernels against its J-integral representation",
    "bologna": "5-kernel moments in terms of the Bologna constant",
    "vacuum-mahler": "2x2 vacuum determinants against Mahler measures m_5, m_6",
    "moment-sum-rule": "linear sum rule among vacuum moments",
    "k1-parts": "K1 K0^4 moment reduced by integration by parts",
    "vanhove-exact": "derived Vanhove operator equals the tabulated operator exactly",
    "vanhove-annihilation": "Vanhove operator annihilates the homogeneous two-scale moments",
    "vanhove-inhomogeneity": "constant inhomogeneity of the Vanhove operator on IvKM(1,n+1;1|u)",
    "vanhove-vacuum-log": "Vanhove operator maps the two-scale vacuum moment to a multiple of log u",
    "mahler-known": "Mahler measure from the Bessel J integral against a known value",
    "mahler-difference": "J-integral of (1-J0)/t J0^4 equals m_5 - m_4",
    "kluyver-two-scale": "Kluyver density against two-scale Bessel moments",
    "ramble": "ramble integral W_n(s) against a torus-average oracle",
    "kernel-wronskian": "I0 K1 + I1 K0 = 1/t",
    "quadrature-stability": "double exponential levels agree when the step is halved",
    "conjecture-lvalue-det": "vacuum determinant against a critical L-value (conjectural)",
    "conjecture-lvalue-mahler": "Mahler measure against a critical L-value (conjectural)",
    "lvalue-tail": "Dirichlet series tail bound and N versus 2N agreement",
}


@dataclass
class CheckReport:
    check_id: str
    paper_ref: str
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    tol: float
    status: Status
    runtime_ms: int

    def to_dict(self) -> dict:
        out = asdict(self)
        out["status"] = self.status.value
        for key in ("lhs", "rhs", "abs_err", "rel_err"):
            if not math.isfinite(out[key]):
                out[key] = repr(out[key])
        return out

    @property
    def gating(self) -> bool:
        return self.status in (Status.PASS, Status.FAIL, Status.WARN)

    def line(self) -> str:
        return (
            f"{self.status.value:<24} {self.check_id:<44} rel={self.rel_err:.2e} "
            f"abs={self.abs_err:.2e} tol={self.tol:.0e} {self.runtime_ms} ms"
        )


def within(lhs: float, rhs: float, tol: float) -> tuple[float, float, bool]:
    """Absolute error, relative error and the acceptance rule.

    Accepted when the relative error is within ``tol``, or, for ``|rhs| < 1``,
    when the absolute error is.
    """
    abs_err = abs(lhs - rhs)
    rel_err = abs_err / abs(rhs) if rhs != 0 else (0.0 if abs_err == 0 else math.inf)
    ok = rel_err <= tol or (abs(rhs) < 1 and abs_err <= tol)
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        ok = False
    return abs_err, rel_err, ok


def make_report(
    check_id: str,
    paper_ref: str,
    lhs: float,
    rhs: float,
    tol: float,
    runtime_ms: int = 0,
    conjecture: bool = False,
) -> CheckReport:
    if paper_ref not in REGISTRY:
        raise KeyError(f"unregistered check tag {paper_ref!r}")
    lhs, rhs = float(lhs), float(rhs)
    abs_err, rel_err, ok = within(lhs, rhs, tol)
    if conjecture:
        status = Status.CONJECTURE_CONSISTENT if ok else Status.CONJECTURE_INCONSISTENT
    else:
        status = Status.PASS if ok else Status.FAIL
    return CheckReport(check_id, paper_ref, lhs, rhs, abs_err, rel_err, tol, status, int(runtime_ms))


def failed_report(check_id: str, paper_ref: str, tol: float, runtime_ms: int = 0, conjecture: bool = False) -> CheckReport:
    """Record for a check whose computation raised."""
    status = Status.CONJECTURE_INCONSISTENT if conjecture else Status.FAIL
    nan = math.nan
    return CheckReport(check_id, paper_ref, nan, nan, nan, nan, tol, status, int(runtime_ms))


class Timer:
    """Wall-clock milliseconds since construction."""

    def __init__(self):
        self.start = time.perf_counter()

    @property
    def ms(self) -> int:
        return int(round(1000 * (time.perf_counter() - self.start)))


@contextmanager
def timed():
    t = Timer()
    yield t
