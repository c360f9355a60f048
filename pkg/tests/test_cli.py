import json
import os
import subprocess
import sys

import numpy as np
import pytest

from expfun import cli
from expfun.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, histogram, main
from expfun.config import ConfigError, parse_config
from expfun.levy import SubordinatorExponent


def read_csv(path):
    meta, rows = {}, []
    for line in path.read_text().splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            meta[k] = v
        else:
            rows.append(line)
    return meta, rows


# ---------------------------------------------------------------- config parsing


def test_parse_minimal_plan():
    plan = parse_config("family: pure-drift\nb: 1\nverify: nfe\n")
    assert isinstance(plan.exponent, SubordinatorExponent)
    assert plan.verify == ["nfe"] and plan.seed == 1729


def test_parse_section3_plan():
    plan = parse_config("verify: [section3]\nalpha: 0.5\n")
    assert plan.exponent is None and plan.alpha == 0.5


def test_parse_json_document():
    plan = parse_config('{"family": "brownian", "sigma": 1, "m": 1, "transforms": ["converse"]}')
    assert plan.target().b == pytest.approx(1.0)


def test_negative_drift_rejected():
    with pytest.raises(ConfigError, match="b >= 0"):
        parse_config("family: pure-drift\nb: -1\n")


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError, match=r"line 3, field 'bogus'"):
        parse_config("family: pure-drift\nb: 1\nbogus: 2\n")


def test_malformed_yaml_reports_line():
    with pytest.raises(ConfigError, match=r"malformed config: line 2, column \d+"):
        parse_config("family: pure-drift\nb: 1: 2\nq: 3\n")


@pytest.mark.parametrize("doc, field", [
    ("seed: -3\n", "seed"),
    ("n: 1.5\n", "n"),
    ("alpha: 1.5\n", "alpha"),
    ("verify: [nope]\n", "verify"),
    ("dt: 0\n", "dt"),
])
def test_bad_values_name_their_field(doc, field):
    with pytest.raises(ConfigError, match=f"field '{field}'"):
        parse_config(doc)


def test_dual_must_be_last():
    with pytest.raises(ConfigError, match="must come last"):
        parse_config("family: stable-example\nalpha: 0.5\ntransforms: [dual, forward]\n")


# ---------------------------------------------------------------- exit statuses


def test_invariant_violation_exits_2(tmp_path, caplog):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("family: tabulated\nr: [0.5, 1.0, 2.0]\nf: [1.0, 2.0, 3.0]\n")
    assert main(["eval", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "violates its invariants" in caplog.text
    assert "not monotone decreasing" in caplog.text
    assert "int min(1, r) f(r) dr is not finite" in caplog.text


def test_malformed_config_exits_2(tmp_path, caplog):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("family: pure-drift\nb: 1\nextra: true\n")
    assert main(["eval", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "line 3, field 'extra'" in caplog.text


def test_missing_output_dir_is_created(tmp_path):
    out = tmp_path / "a" / "b"
    assert main(["eval", "--family", "pure-drift", "--out", str(out)]) == EXIT_OK
    assert (out / "report.json").exists() and (out / "eval.csv").exists()


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_output_exits_2_permissions(tmp_path):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    try:
        assert main(["eval", "--family", "pure-drift", "--out", str(ro / "x")]) == EXIT_CONFIG
    finally:
        ro.chmod(0o700)


def test_unwritable_output_exits_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    # a regular file where a directory is needed fails even for root
    assert main(["eval", "--family", "pure-drift", "--out", str(blocker / "sub")]) == EXIT_CONFIG


def test_statistical_failure_exits_1(tmp_path, monkeypatch):
    real = cli.V.verify_prop1

    def broken(*a, **k):
        rep = real(*a, **k)
        rep.moments[0].z[0] = 50.0
        return rep

    monkeypatch.setattr(cli.V, "verify_prop1", broken)
    code = main(["verify", "--identity", "prop1", "--n", "1000", "--out", str(tmp_path)])
    assert code == EXIT_FAIL
    assert json.loads((tmp_path / "report.json").read_text())["passed"] is False


@pytest.mark.slow
def test_suite_coarse_step_fails_with_warnings(tmp_path, caplog):
    code = main(["suite", "--dt", "0.5", "--out", str(tmp_path)])
    assert code == EXIT_FAIL
    warned = [r for r in caplog.records if "step-size warning" in r.getMessage()]
    assert warned
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["config"]["dt"] == 0.5 and not doc["passed"]


# ---------------------------------------------------------------- artifacts


def test_eval_csv_format(tmp_path):
    assert main(["eval", "--family", "exponential-jump", "--out", str(tmp_path)]) == EXIT_OK
    meta, rows = read_csv(tmp_path / "eval.csv")
    assert "exponent" in meta and meta["seed"] == "1729"
    assert rows[0] == "u,value"
    doc = json.loads((tmp_path / "report.json").read_text())
    for row, u, v in zip(rows[1:], doc["grid"], doc["values"]):
        a, b = row.split(",")
        assert float(a) == u and float(b) == v
        assert v == pytest.approx(u / (1 + u), rel=1e-9)


def test_transform_cross_check(tmp_path):
    code = main(["transform", "--family", "stable-example", "--alpha", "0.5", "--transform", "forward", "--out", str(tmp_path)])
    assert code == EXIT_OK
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["cross_check_max_rel"] <= 1e-8


def test_moments_table(tmp_path):
    code = main(["moments", "--family", "exponential-jump", "--orders", "4", "--out", str(tmp_path)])
    assert code == EXIT_OK
    meta, rows = read_csv(tmp_path / "moments.csv")
    assert rows[0] == "order,value"
    # phi(k) = k/(1+k): E[I^n] = n! / prod phi(k) = (n+1)!
    vals = [float(r.split(",")[1]) for r in rows[1:]]
    np.testing.assert_allclose(vals, [2, 6, 24, 120], rtol=1e-12)


def test_sample_csv_one_value_per_line(tmp_path):
    code = main(["sample", "--family", "pure-drift", "--n", "300", "--out", str(tmp_path)])
    assert code == EXIT_OK
    meta, rows = read_csv(tmp_path / "samples.csv")
    assert meta["n"] == "300" and meta["seed"] == "1729" and meta["order"] == "ascending"
    vals = np.array([float(r) for r in rows])
    assert vals.size == 300 and np.all(np.diff(vals) >= 0)
    np.testing.assert_allclose(vals, 1.0, rtol=1e-6)


def test_histogram_edges_recorded(tmp_path):
    x = np.linspace(0.0, 10.0, 2001)
    h = histogram(x)
    assert len(h["edges"]) == 101 and h["edges"][0] == 0.0
    assert h["edges"][-1] == pytest.approx(np.quantile(x, 0.995))
    assert sum(h["counts"]) + h["above"] == x.size

    assert main(["verify", "--identity", "prop1", "--n", "500", "--out", str(tmp_path)]) in (EXIT_OK, EXIT_FAIL)
    doc = json.loads((tmp_path / "report.json").read_text())
    art = doc["reports"][0]["artifacts"]["entrance"]
    meta, rows = read_csv(tmp_path / art["histogram_csv"])
    assert int(meta["bins"]) == 100 and float(meta["hi"]) == art["histogram"]["edges"][-1]
    assert [int(r) for r in rows] == art["histogram"]["counts"]


def _numbers(x, path=()):
    if isinstance(x, dict):
        for k, v in x.items():
            yield from _numbers(v, path + (k,))
    elif isinstance(x, list):
        for i, v in enumerate(x):
            yield from _numbers(v, path + (i,))
    elif isinstance(x, float):
        yield path, x


def test_report_round_trip_bit_exact(tmp_path):
    from expfun import verify as V
    from expfun import families

    rep = V.verify_nfe(families.exponential_jump(), 500, 11)
    doc = rep.to_dict()
    back = json.loads(cli.dump_report(doc))
    a, b = dict(_numbers(doc)), dict(_numbers(back))
    assert a.keys() == b.keys() and len(a) > 40
    for k in a:
        assert np.float64(a[k]).tobytes() == np.float64(b[k]).tobytes(), k
    assert cli.dump_report(back) == cli.dump_report(doc)


def test_default_seed_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["sample", "--family", "exponential-jump", "--n", "200", "--out", str(d)]) == EXIT_OK
    assert (a / "samples.csv").read_bytes() == (b / "samples.csv").read_bytes()
    assert json.loads((a / "report.json").read_text())["seed"] == 1729


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "expfun", "eval", "--family", "pure-drift", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert r.returncode == 0, r.stderr
    assert json.loads((tmp_path / "report.json").read_text())["passed"] is True
