"""Named verification suites.

A suite is an ordered list of zero-argument callables, each returning a list
of :class:`~bessellab.reports.CheckReport`.  A callable that raises is
recorded as a failed check rather than aborting the run.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from . import determinants as det
from . import mahler, moments, operators
from .kernels import KernelKind, i0e, i1e, k0e, k1e
from .moments import Family, MomentSpec
from .polynomials import Poly
from .quadrature import IntegrandMeta, accelerate, integrate_decaying, integrate_oscillatory
from .reports import CheckReport, Timer, failed_report, make_report

Check = Callable[[], list[CheckReport]]


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    rel_tol_decaying: float = 1e-12
    rel_tol_oscillatory: float = 1e-9
    k_max_det: int = det.K_MAX_DET
    k_max_wronskian: int = det.K_MAX_WRONSKIAN
    u_grid: list[float] = field(default_factory=lambda: [0.2, 0.5, 0.8])
    accel_depth: int = 12
    cache_path: str = ""

    def validate(self) -> None:
        if self.rel_tol_decaying < 1e-14 or self.rel_tol_oscillatory < 1e-14:
            raise ConfigError("tolerances must be at least 1e-14")
        if not 1 <= self.k_max_det <= det.K_MAX_DET:
            raise ConfigError(f"k_max_det must lie in 1..{det.K_MAX_DET}")
        if not 2 <= self.k_max_wronskian <= det.K_MAX_WRONSKIAN:
            raise ConfigError(f"k_max_wronskian must lie in 2..{det.K_MAX_WRONSKIAN}")
        if not all(0 < u < 1 for u in self.u_grid):
            raise ConfigError("u_grid values must lie in (0, 1)")
        if self.accel_depth < 2:
            raise ConfigError("accel_depth must be at least 2")

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        """Parse ``key = value`` lines; ``#`` starts a comment."""
        cfg = cls()
        types = {f.name: f.type for f in fields(cls)}
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            cfg.set(key, value)
        cfg.validate()
        return cfg

    def set(self, key: str, value: str) -> None:
        try:
            if key in ("rel_tol_decaying", "rel_tol_oscillatory"):
                setattr(self, key, float(value))
            elif key in ("k_max_det", "k_max_wronskian", "accel_depth"):
                setattr(self, key, int(value))
            elif key == "u_grid":
                self.u_grid = [float(v) for v in value.replace(",", " ").split()]
            elif key == "cache_path":
                self.cache_path = value
            else:
                raise ConfigError(f"unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value for {key}: {value!r}") from exc


def guarded(check_id: str, tag: str, tol: float, fn: Check, conjecture: bool = False) -> Check:
    def run() -> list[CheckReport]:
        timer = Timer()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return fn()
        except Exception:  # noqa: BLE001 - any failure becomes a FAIL record
            return [failed_report(check_id, tag, tol, timer.ms, conjecture)]

    return run


def single(check_id: str, tag: str, lhs_fn: Callable[[], float], rhs_fn: Callable[[], float], tol: float) -> Check:
    def fn() -> list[CheckReport]:
        timer = Timer()
        return [make_report(check_id, tag, lhs_fn(), rhs_fn(), tol, timer.ms)]

    return guarded(check_id, tag, tol, fn)


# ---------------------------------------------------------------------------
# reference operators (integer coefficients, lowest derivative first)

_U = Poly([0, 1], "u")


def _p(*roots_or_coeffs, coeffs: bool = False) -> Poly:
    return Poly(roots_or_coeffs, "u") if coeffs else Poly.from_roots(roots_or_coeffs, "u")


REFERENCE_VANHOVE = {
    3: (
        _p(-4, 1, coeffs=True),
        _p(64, -68, 7, coeffs=True),
        _U * _p(32, -15, 1, coeffs=True) * 6,
        _p(0, 0, 4, 16),
    ),
    4: (
        _p(-5, 1, coeffs=True),
        _p(-5, 3, coeffs=True) * _p(-57, 5, coeffs=True),
        _p(-450, 1839, -518, 25, coeffs=True),
        _U * _p(-450, 777, -140, 5, coeffs=True) * 2,
        _p(0, 0, 25, 9, 1),
    ),
}


def _vanhove_exact(n: int) -> Check:
    def fn() -> list[CheckReport]:
        timer = Timer()
        got = derive_coeffs(n)
        want = REFERENCE_VANHOVE[n]
        same = len(got) == len(want) and all(a == b for a, b in zip(got, want))
        return [make_report(f"vanhove-L{n}-exact", "vanhove-exact", 1.0 if same else 0.0, 1.0, 0.0, timer.ms)]

    return guarded(f"vanhove-L{n}-exact", "vanhove-exact", 0.0, fn)


def derive_coeffs(n: int) -> tuple[Poly, ...]:
    return operators.derive_vanhove(n).operator.coeffs


def _vanhove_numeric(cfg: RunConfig, u: float = 0.5) -> list[Check]:
    out: list[Check] = []
    tol_zero = 1e-7
    for n in (3, 4):
        k = n // 2 + n % 2
        cols = det.mu_columns(k) if n % 2 else det.nu_columns(k)
        if n == 3:
            for j, col in enumerate(cols, 1):
                target = [(c, MomentSpec(f, a, b, 1, u)) for c, f, a, b in col]
                out.append(
                    single(
                        f"vanhove-L{n}-annihilates-col{j}",
                        "vanhove-annihilation",
                        lambda t=target, n=n: operators.apply_vanhove_numeric(operators.derive_vanhove(n), t, u),
                        lambda: 0.0,
                        tol_zero,
                    )
                )
        for fam, expected in ((Family.IV, -math.factorial(n + 1) / 2**n), (Family.KV, math.factorial(n) / 2**n)):
            spec = MomentSpec(fam, 1, n + 1, 1, u)
            out.append(
                single(
                    f"vanhove-L{n}-{fam.value}(1,{n + 1};1)",
                    "vanhove-inhomogeneity",
                    lambda s=spec, n=n: operators.apply_vanhove_numeric(operators.derive_vanhove(n), s, u),
                    lambda e=expected: e,
                    1e-6,
                )
            )
        out.append(
            single(
                f"vanhove-L{n}-vacuum-log",
                "vanhove-vacuum-log",
                lambda n=n: operators.apply_vanhove_numeric(operators.derive_vanhove(n), "checked-vacuum", u),
                lambda n=n: math.factorial(n + 1) / 2 ** (n + 1) * math.log(u),
                1e-6,
            )
        )
    return out


# ---------------------------------------------------------------------------
# moment identities


def _ikm(a, b, n, cfg: RunConfig) -> float:
    return moments.ikm(a, b, n, cfg.rel_tol_decaying)


def moment_checks(cfg: RunConfig) -> list[Check]:
    out = [
        single("IKM(1,2;1)", "moment-closed-form", lambda: _ikm(1, 2, 1, cfg), lambda: math.pi / (3 * math.sqrt(3)), 1e-12),
        single("IKM(1,3;1)", "moment-closed-form", lambda: _ikm(1, 3, 1, cfg), lambda: math.pi**2 / 16, 1e-12),
        single(
            "sum-rule-IKM(3,5;1)",
            "moment-sum-rule",
            lambda: math.pi**2 * _ikm(3, 5, 1, cfg),
            lambda: _ikm(1, 7, 1, cfg),
            1e-10,
        ),
        single(
            "sum-rule-IKM(4,4;1)",
            "moment-sum-rule",
            lambda: 9 * math.pi**2 * _ikm(4, 4, 1, cfg),
            lambda: 14 * _ikm(2, 6, 1, cfg),
            1e-10,
        ),
        single(
            "IKM(0,5;5)-relation",
            "moment-sum-rule",
            lambda: _ikm(0, 5, 5, cfg),
            lambda: 76 / 15 * _ikm(0, 5, 3, cfg) - 16 / 45 * _ikm(0, 5, 1, cfg) + 8 / 15,
            1e-10,
        ),
    ]
    for n in (1, 2, 3):
        out.append(
            single(
                f"K1K0^4-t^{2 * n}",
                "k1-parts",
                lambda n=n: -moments.evaluate(MomentSpec(Family.KP, 0, 5, 2 * n - 1, 1.0), cfg.rel_tol_decaying).value,
                lambda n=n: 2 * n / 5 * _ikm(0, 5, 2 * n - 1, cfg),
                1e-10,
            )
        )
    return out


def property_checks(cfg: RunConfig) -> list[Check]:
    def kernel_wronskian() -> list[CheckReport]:
        timer = Timer()
        t = np.geomspace(1e-3, 600, 4001)
        lhs = i0e(t) * k1e(t) + i1e(t) * k0e(t)
        worst = float(np.max(np.abs(lhs * t - 1.0)))
        return [make_report("kernel-wronskian", "kernel-wronskian", 1.0 + worst, 1.0, 1e-13, timer.ms)]

    def level_stability() -> list[CheckReport]:
        timer = Timer()
        spec = MomentSpec.plain(2, 3, 3)
        f = moments.integrand(spec)
        meta = IntegrandMeta(decay_exponent=spec.decay_exponent, endpoint_log_power=spec.b)
        fine = integrate_decaying(f, meta, rel_tol=1e-13).value
        coarse = integrate_decaying(f, meta, rel_tol=1e-8).value
        return [make_report("de-level-stability-IKM(2,3;3)", "quadrature-stability", coarse, fine, 1e-8, timer.ms)]

    def levin_j0() -> list[CheckReport]:
        timer = Timer()
        from .kernels import j0

        meta = IntegrandMeta(oscillatory=True, zero_source=KernelKind.J0, zero_scale=1.0)
        res = integrate_oscillatory(j0, meta, accel_depth=cfg.accel_depth, rel_tol=cfg.rel_tol_oscillatory)
        return [make_report("levin-int-J0", "quadrature-stability", res.value, 1.0, cfg.rel_tol_oscillatory * 10, timer.ms)]

    def levin_series() -> list[CheckReport]:
        timer = Timer()
        terms = [(-1) ** k / (k + 1) for k in range(30)]
        est = accelerate(np.cumsum(terms), cfg.accel_depth)
        return [make_report("levin-log2-series", "quadrature-stability", est, math.log(2), 1e-10, timer.ms)]

    return [
        guarded("kernel-wronskian", "kernel-wronskian", 1e-13, kernel_wronskian),
        guarded("de-level-stability-IKM(2,3;3)", "quadrature-stability", 1e-8, level_stability),
        guarded("levin-int-J0", "quadrature-stability", 1e-8, levin_j0),
        guarded("levin-log2-series", "quadrature-stability", 1e-10, levin_series),
    ]


# ---------------------------------------------------------------------------
# suites


def determinant_checks(cfg: RunConfig) -> list[Check]:
    out: list[Check] = []
    for kind in "MN":
        for k in range(1, cfg.k_max_det + 1):
            tol = 1e-10 if k <= 3 else 1e-8
            out.append(guarded(f"det-{kind}{k}", f"det-{kind.lower()}-product", tol, lambda kind=kind, k=k: [det.check_det_closed(kind, k, rel_tol=1e-13)]))
    for kind in "MN":
        for k in range(2, cfg.k_max_det + 1):
            out.append(guarded(f"recursion-{kind}-{k}", f"det-{kind.lower()}-recursion", 1e-8, lambda kind=kind, k=k: [det.check_recursion(kind, k)]))
    out.append(guarded("bologna", "bologna", 1e-9, det.bologna_checks))
    return moment_checks(cfg) + out


def wronskian_checks(cfg: RunConfig) -> list[Check]:
    rt = cfg.rel_tol_decaying
    out: list[Check] = []
    for u in (0.25, 1.0, 3.0):
        out.append(guarded(f"wronskian-Omega-k2-u{u:g}", "wronskian-omega-odd", 1e-9, lambda u=u: [det.check_wronskian("Omega", 2, u, 1e-9, rt)]))
    for u in (0.25, 0.5, 0.9):
        out.append(guarded(f"wronskian-omega-k2-u{u:g}", "wronskian-omega-even", 1e-8, lambda u=u: [det.check_wronskian("omega", 2, u, 1e-8, rt)]))
    for k in range(3, cfg.k_max_wronskian + 1):
        for fam in ("Omega", "omega"):
            tag = "wronskian-omega-odd" if fam == "Omega" else "wronskian-omega-even"
            out.append(guarded(f"wronskian-{fam}-k{k}-u0.5", tag, 1e-7, lambda fam=fam, k=k: [det.check_wronskian(fam, k, 0.5, 1e-7, rt)]))
    for k in range(2, cfg.k_max_wronskian + 1):
        out.append(guarded(f"sign-omega-k{k}", "wronskian-sign", 0.0, lambda k=k: det.check_sign_pattern(k, cfg.u_grid, rt)))
    out.append(guarded("endpoint-omega4-at-one", "wronskian-endpoint", 1e-4, lambda: [det.check_endpoint_limit()]))
    for k in range(2, min(cfg.k_max_wronskian, 3) + 1):
        out.append(guarded(f"factorization-OmegaM-k{k}", "factorization-at-one", 1e-8, lambda k=k: [det.factorization_at_one("OmegaM", k)]))
    return out


def operator_checks(cfg: RunConfig) -> list[Check]:
    return [_vanhove_exact(3), _vanhove_exact(4)] + _vanhove_numeric(cfg)


def vacuum_checks(cfg: RunConfig) -> list[Check]:
    out: list[Check] = [
        guarded("factorization-Omega_check-k2", "vacuum-factorization-at-one", 1e-8, lambda: [det.factorization_at_one("Omega_check", 2)]),
        guarded("psi2-u1", "vacuum-psi2", 1e-8, lambda: [det.psi2_at_one()]),
    ]
    for which, tag in (
        ("psi2", "vacuum-psi2"),
        ("psi3", "vacuum-psi3"),
        ("omega3_check", "vacuum-omega3"),
        ("omega4_check", "vacuum-omega4"),
    ):
        tol = 1e-8 if which.startswith("psi") else 1e-7
        out.append(guarded(f"{which}-u0.5", tag, tol, lambda w=which: [det.vacuum_wronskian_identity(w, 0.5)]))
    out.append(guarded("vacuum-det-mahler", "vacuum-mahler", 1e-7, det.vacuum_mahler_checks))
    return out


def mahler_checks(cfg: RunConfig) -> list[Check]:
    def ramble() -> list[CheckReport]:
        timer = Timer()
        out = [make_report("ramble-W1(0.5)", "ramble", mahler.ramble_w(1, 0.5), 1.0, 1e-8, timer.ms)]
        timer = Timer()
        out.append(make_report("ramble-W2(1)", "ramble", mahler.ramble_w(2, 1.0), 4 / math.pi, 1e-8, timer.ms))
        return out

    return [
        guarded("mahler-known", "mahler-known", 1e-8, mahler.known_mahler_checks),
        guarded("mahler-difference-m5-m4", "mahler-difference", 1e-7, lambda: [mahler.mahler_difference_check()]),
        guarded("kluyver", "kluyver-two-scale", 1e-7, mahler.kluyver_checks),
        guarded("ramble", "ramble", 1e-8, ramble),
    ] + property_checks(cfg)


def conjecture_checks(cfg: RunConfig) -> list[Check]:
    return [
        guarded("lvalue-tail", "lvalue-tail", 1e-10, mahler.lvalue_tail_checks),
        guarded("conjectures", "conjecture-lvalue-det", 1e-7, mahler.conjecture_checks, conjecture=True),
    ]


SUITES: dict[str, Callable[[RunConfig], list[Check]]] = {
    "determinants": determinant_checks,
    "wronskians": wronskian_checks,
    "operators": operator_checks,
    "vacuum": vacuum_checks,
    "mahler": mahler_checks,
    "conjectures": conjecture_checks,
}
SUITE_NAMES = ("all",) + tuple(SUITES)


def run_suite(name: str, cfg: RunConfig | None = None, jobs: int = 1) -> list[CheckReport]:
    """Run a suite; results keep the suite's declaration order."""
    cfg = cfg or RunConfig()
    if name == "all":
        checks = [c for build in SUITES.values() for c in build(cfg)]
    elif name in SUITES:
        checks = SUITES[name](cfg)
    else:
        raise ConfigError(f"unknown suite {name!r}")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda c: c(), checks))
    else:
        results = [c() for c in checks]
    return [r for group in results for r in group]
