import math

import pytest

from bessellab.reports import REGISTRY, Status, failed_report, make_report, within
from bessellab.suites import SUITE_NAMES, SUITES, ConfigError, RunConfig, guarded, run_suite


def test_within_rule():
    assert within(1.0 + 1e-10, 1.0, 1e-9)[2]
    assert not within(2.0, 1.0, 1e-9)[2]
    # absolute acceptance below |rhs| = 1
    assert within(1e-12, 0.0, 1e-9)[2]
    assert not within(1e-6, 0.0, 1e-9)[2]
    assert not within(math.nan, 1.0, 1.0)[2]


def test_report_records():
    r = make_report("x", "kernel-wronskian", 1.0, 1.0, 1e-12)
    assert r.status is Status.PASS and r.gating
    c = make_report("x", "conjecture-lvalue-det", 1.0, 2.0, 1e-12, conjecture=True)
    assert c.status is Status.CONJECTURE_INCONSISTENT and not c.gating
    with pytest.raises(KeyError):
        make_report("x", "not-a-tag", 1.0, 1.0, 1e-12)
    f = failed_report("x", "bologna", 1e-9)
    assert f.status is Status.FAIL
    assert f.to_dict()["lhs"] == "nan"
    assert "FAIL" in f.line()


def test_run_config_parsing(tmp_path):
    cfg_file = tmp_path / "c.cfg"
    cfg_file.write_text("rel_tol_decaying = 1e-11  # looser\nu_grid = 0.1 0.3\nk_max_det = 3\n\n")
    cfg = RunConfig.from_file(cfg_file)
    assert cfg.rel_tol_decaying == 1e-11
    assert cfg.u_grid == [0.1, 0.3]
    assert cfg.k_max_det == 3
    for text in ("k_max_det = four", "k_max_det = 9", "accel_depth = 1", "no equals sign"):
        cfg_file.write_text(text + "\n")
        with pytest.raises(ConfigError):
            RunConfig.from_file(cfg_file)


def test_guarded_turns_exceptions_into_failures():
    def boom():
        raise ZeroDivisionError

    [r] = guarded("boom", "bologna", 1e-9, boom)()
    assert r.status is Status.FAIL
    [c] = guarded("boom", "conjecture-lvalue-det", 1e-7, boom, conjecture=True)()
    assert c.status is Status.CONJECTURE_INCONSISTENT


def test_suite_names():
    assert set(SUITE_NAMES) == {"all", *SUITES}
    with pytest.raises(ConfigError):
        run_suite("nonsense", RunConfig())


def test_jobs_preserve_order_and_values(fresh_cache):
    serial = run_suite("operators", RunConfig())
    threaded = run_suite("operators", RunConfig(), jobs=4)
    assert [r.check_id for r in serial] == [r.check_id for r in threaded]
    assert [r.lhs for r in serial] == [r.lhs for r in threaded]


def test_k_limits_shrink_the_determinant_suite(fresh_cache):
    cfg = RunConfig(k_max_det=2)
    ids = [r.check_id for r in run_suite("determinants", cfg)]
    assert "det-M2" in ids and "det-M3" not in ids


def test_every_tag_is_registered(fresh_cache):
    for name in ("determinants", "operators"):
        for r in run_suite(name, RunConfig()):
            assert r.paper_ref in REGISTRY
