"""Command-line driver.

Exit codes: 0 success, 1 a check failed, 2 configuration or parse error,
3 divergent moment.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import determinants as det
from . import mahler, moments, operators
from .moments import CACHE_ENV, DivergentMomentError, MomentCache, MomentSpec
from .quadrature import QuadratureError
from .reports import Status
from .suites import SUITE_NAMES, ConfigError, RunConfig, run_suite

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_DIVERGENT = 3

_KNOWN = {
    "IKM(1,2;1)": "pi/(3 sqrt3)",
    "IKM(1,3;1)": "pi^2/16",
    "IKM(0,1;1)": "1",
    "IKM(0,2;1)": "1/2",
}


def _config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.tol is not None:
        cfg.rel_tol_decaying = args.tol
    if getattr(args, "k", None) is not None and args.command == "verify":
        cfg.k_max_det = min(args.k, det.K_MAX_DET)
        cfg.k_max_wronskian = max(2, min(args.k, det.K_MAX_WRONSKIAN))
    if getattr(args, "u", None) is not None and args.command == "verify":
        cfg.u_grid = [args.u]
    cfg.validate()
    if cfg.cache_path:
        moments.set_default_cache(MomentCache(cfg.cache_path))
    return cfg


def _cache() -> MomentCache:
    return moments.default_cache()


def cmd_verify(args) -> int:
    cfg = _config(args)
    suite = args.suite_pos or args.suite
    if suite not in SUITE_NAMES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITE_NAMES)}")
    reports = run_suite(suite, cfg, jobs=args.jobs)
    for r in reports:
        print(r.line())
    n_fail = sum(r.status is Status.FAIL for r in reports)
    n_pass = sum(r.status is Status.PASS for r in reports)
    n_conj = sum(not r.gating for r in reports)
    print(f"{n_pass} passed, {n_fail} failed, {n_conj} conjecture checks (non-gating)")
    if args.report:
        Path(args.report).write_text(json.dumps([r.to_dict() for r in reports], indent=2) + "\n", encoding="utf-8")
    return EXIT_FAIL if n_fail else EXIT_OK


def cmd_moment(args) -> int:
    try:
        spec = MomentSpec.parse(args.spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    tol = args.tol if args.tol is not None else 1e-13
    cache = _cache()
    hit = cache.get(spec.canonical(), tol) is not None
    res = moments.evaluate(spec, tol, cache)
    print(f"{spec.canonical()} = {res.value!r}")
    print(f"error estimate {res.err_estimate:.2e}  cache {'hit' if hit else 'miss'}")
    if spec.canonical() in _KNOWN:
        print(f"= {_KNOWN[spec.canonical()]}")
    return EXIT_OK


def cmd_det(args) -> int:
    kind = args.kind
    k = args.k if args.k is not None else 2
    m = det.build_matrix(kind, k, args.tol or 1e-13)
    value, err = m.det_with_error()
    print(f"det {kind} k={k} = {value!r}  (propagated error {err:.1e})")
    if kind == "Mk":
        print(f"product formula      {det.det_closed_m(k)!r}")
    elif kind == "Nk":
        print(f"product formula      {det.det_closed_n(k)!r}")
    return EXIT_OK


def cmd_wronskian(args) -> int:
    k = args.k if args.k is not None else 2
    u = args.u if args.u is not None else 0.5
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", det.ConditioningWarning)
        w = det.wronskian(args.family, k, u, args.tol or det.ENTRY_TOL)
    print(f"{args.family} k={k} u={u:g}: {w.value!r}  (propagated error {w.err:.1e}, cancellation {w.cancellation:.1e})")
    if args.family in ("Omega", "omega"):
        print(f"closed form          {det.wronskian_closed_form(args.family, k, u)!r}")
    return EXIT_OK


def cmd_vanhove(args) -> int:
    pair = operators.derive_vanhove(args.n)
    print(operators.format_operator(pair.operator))
    return EXIT_OK


def cmd_mahler(args) -> int:
    value = mahler.mahler_linear(args.n)
    print(f"m(1 + x_1 + ... + x_{args.n - 1}) = {float(value)!r}")
    return EXIT_OK


def cmd_lvalue(args) -> int:
    lv = mahler.l_value(args.form, args.s)
    print(f"L({lv.form}, {lv.s}) = {lv.value!r}  (N = {lv.N}, tail bound {lv.tail_bound:.1e})")
    return EXIT_OK


def cmd_cache(args) -> int:
    cache = _cache()
    if args.action == "stats":
        where = cache.path or "(in memory; set " + CACHE_ENV + " to persist)"
        print(f"{len(cache)} entries  {where}")
    elif args.action == "clear":
        cache.clear()
        print("cache cleared")
    elif args.action == "export":
        lines = "".join(json.dumps(r) + "\n" for r in cache.records())
        if args.path:
            Path(args.path).write_text(lines, encoding="utf-8")
        else:
            sys.stdout.write(lines)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="relative tolerance for moment quadrature")
    common.add_argument("--k", type=int, help="matrix size / Wronskian index")
    common.add_argument("--u", type=float, help="two-scale parameter")
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for verify")
    common.add_argument("--report", help="write the JSON report here")
    common.add_argument("--suite", default="all", help="suite for verify")

    p = argparse.ArgumentParser(prog="bessellab", description="Bessel moment determinants and Wronskians")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite_pos", nargs="?", metavar="SUITE", help=" | ".join(SUITE_NAMES))
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("moment", parents=[common], help="evaluate one moment, e.g. 'IvKM(1,4;1|0.5)'")
    m.add_argument("spec")
    m.set_defaults(func=cmd_moment)

    d = sub.add_parser("det", parents=[common], help="Broadhurst-Mellit determinant")
    d.add_argument("--kind", default="Mk", choices=[k.value for k in det.MatrixKind])
    d.set_defaults(func=cmd_det)

    w = sub.add_parser("wronskian", parents=[common], help="Wronskian of two-scale moments")
    w.add_argument("--family", default="Omega", choices=[f.value for f in det.WronskianFamily])
    w.set_defaults(func=cmd_wronskian)

    o = sub.add_parser("vanhove", parents=[common], help="print the Vanhove operator of order n")
    o.add_argument("n", type=int)
    o.set_defaults(func=cmd_vanhove)

    mm = sub.add_parser("mahler", parents=[common], help="Mahler measure m(1 + x_1 + ... + x_{n-1})")
    mm.add_argument("n", type=int)
    mm.set_defaults(func=cmd_mahler)

    lv = sub.add_parser("lvalue", parents=[common], help="L-value of an eta-product form")
    lv.add_argument("form", choices=sorted(mahler.FORMS))
    lv.add_argument("s", type=int)
    lv.set_defaults(func=cmd_lvalue)

    c = sub.add_parser("cache", parents=[common], help="inspect or reset the moment cache")
    c.add_argument("action", choices=("stats", "clear", "export"))
    c.add_argument("path", nargs="?")
    c.set_defaults(func=cmd_cache)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command != "verify":
            cfg = RunConfig.from_file(args.config) if args.config else None
            if cfg and cfg.cache_path:
                moments.set_default_cache(MomentCache(cfg.cache_path))
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergentMomentError as exc:
        print(f"divergent moment: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except (ValueError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"quadrature failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
