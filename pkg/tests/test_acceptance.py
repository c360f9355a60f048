"""Acceptance criteria 1 to 10.

Each test records one PASS/FAIL line, printed at the end of the pytest run
(and to stdout, visible with ``-s``).  Criteria 5 to 10 read the report of a
single full ``expfun suite`` run at the shipped seed and sizes; criterion 10
also reruns the suite and compares every artifact byte for byte.
"""

import filecmp
import json
import math

import numpy as np
import pytest

from expfun import families, verify as V
from expfun.cli import main
from expfun.levy import eval_phi
from expfun.moments import entrance_moments, expfun_neg_moments, factorization_check_analytic
from expfun.samplers import sample_exponential, sample_positive_stable
from expfun.samplers.rng import DEFAULT_SEED, RngState
from expfun.transforms import (
    CROSS_CHECK_GRID,
    cross_check,
    prop1_transform,
    theorem1_converse,
    theorem1_forward,
)

from conftest import ACCEPTANCE_LINES, sn_families, subordinator_families

ALPHAS = (0.3, 0.5, 0.7)


def record(k, ok, detail):
    line = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


def criterion_families():
    return [families.exponential_jump()] + [families.stable_example(a) for a in ALPHAS]


# ---------------------------------------------------------------- suite runs


@pytest.fixture(scope="session")
def suite_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite-a")
    code = main(["suite", "--out", str(out)])
    return out, code


@pytest.fixture(scope="session")
def suite_report(suite_dir):
    out, code = suite_dir
    doc = json.loads((out / "report.json").read_text())
    return doc, code


def reports_for(doc, k):
    by_name = {r["name"]: r for r in doc["reports"]}
    return [by_name[n] for n in doc["criteria"][str(k)]]


# ---------------------------------------------------------------- analytic criteria


def test_criterion_1_analytic_moment_identities():
    worst_fact, worst_chain = 0.0, 0.0
    for phi in criterion_families():
        worst_fact = max(worst_fact, float(factorization_check_analytic(phi, 10).max()))
        psi1 = theorem1_forward(phi)
        a = entrance_moments(psi1, 10).values
        b = expfun_neg_moments(prop1_transform(psi1), 10).values
        worst_chain = max(worst_chain, float(np.max(np.abs(a / b - 1))))
    ok = worst_fact <= 1e-12 and worst_chain <= 1e-10
    record(1, ok, f"factorization residual {worst_fact:.2e} (<= 1e-12), entrance chain {worst_chain:.2e} (<= 1e-10)")


def test_criterion_2_quadrature_constant():
    us = np.array(CROSS_CHECK_GRID)
    cs, spreads = [], []
    for a in ALPHAS:
        phi = families.stable_example(a)
        closed = np.array([a * math.gamma(a * u + 1) / math.gamma(a * (u - 1) + 1) for u in us])
        ratio = np.array([eval_phi(phi, u) for u in us]) / closed
        spreads.append(float((ratio.max() - ratio.min()) / ratio.mean()))
        cs.append(float(ratio.mean()))
    c_alpha = [c * a for c, a in zip(cs, ALPHAS)]
    ok = max(spreads) <= 1e-6 and np.allclose(c_alpha, 1.0, rtol=1e-7)
    detail = ", ".join(f"c({a})={c:.9g}" for a, c in zip(ALPHAS, cs))
    record(2, ok, f"{detail}; c*alpha = 1 to {max(abs(x - 1) for x in c_alpha):.1e}; spread {max(spreads):.1e}")


def test_criterion_3_transform_cross_checks():
    worst = {"forward": 0.0, "converse": 0.0, "prop1": 0.0, "roundtrip": 0.0}
    for phi in subordinator_families():
        psi1 = theorem1_forward(phi)
        worst["forward"] = max(worst["forward"], cross_check(psi1))
        back = theorem1_converse(psi1)
        rt = max(abs(eval_phi(back, u) - phi.value(u)) / max(abs(phi.value(u)), 1e-300) for u in CROSS_CHECK_GRID)
        worst["roundtrip"] = max(worst["roundtrip"], rt)
    for psi in sn_families():
        worst["converse"] = max(worst["converse"], cross_check(theorem1_converse(psi)))
        worst["prop1"] = max(worst["prop1"], cross_check(prop1_transform(psi)))
    ok = max(worst.values()) <= 1e-5
    record(3, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (all <= 1e-5)")


def test_criterion_4_stable_sampler():
    worst_z, worst_p, n = 0.0, 1.0, 100_000
    for a in ALPHAS:
        rs = RngState(DEFAULT_SEED).child(f"acceptance-stable-{a}")
        s = sample_positive_stable(a, rs.child("s").generator(), n)
        target = [math.exp(math.lgamma(k + 1) - math.lgamma(a * k + 1)) for k in range(1, 5)]
        rep = V.empirical_moments(s ** (-a), [1, 2, 3, 4], target)
        worst_z = max(worst_z, max(abs(z) for z in rep.z))
        e = sample_exponential(rs.child("e").generator(), n)
        worst_p = min(worst_p, V.ks_test_exp1(e**a * s ** (-a)).p_value)
    ok = worst_z <= 3 and worst_p > 0.005
    record(4, ok, f"max |z| {worst_z:.2f} (<= 3), min KS p {worst_p:.3f} (> 0.005), N=1e5")


# ---------------------------------------------------------------- Monte Carlo criteria


def _summary(r):
    ps = ", ".join(f"{k['p_value']:.3f}" for k in r["ks"])
    z = max((abs(z) for m in r["moments"] for z in m["z"]), default=0.0)
    return f"{r['name']} p={ps} max|z|={z:.2f}"


def test_criterion_5_theorem1_factorization(suite_report):
    doc, _ = suite_report
    reps = reports_for(doc, 5)
    ok = len(reps) == 2 and all(r["passed"] and r["n"] == 100_000 for r in reps)
    ok = ok and all(k["p_value"] > 0.005 for r in reps for k in r["ks"])
    record(5, ok, "; ".join(_summary(r) for r in reps))


def test_criterion_6_converse_factorization(suite_report):
    doc, _ = suite_report
    reps = reports_for(doc, 6)
    ok = len(reps) == 2 and all(r["passed"] and r["n"] == 100_000 for r in reps)
    record(6, ok, "; ".join(_summary(r) for r in reps))


def test_criterion_7_entrance_law(suite_report):
    doc, _ = suite_report
    (r,) = reports_for(doc, 7)
    mean = next(m for m in r["moments"] if m["label"].startswith("entrance mean"))
    ok = r["passed"] and r["n"] == 20_000 and r["config"]["x0"] == 1e-3
    ok = ok and mean["analytic"] == [2.0] and abs(mean["z"][0]) <= 4
    record(7, ok, f"{_summary(r)}; entrance mean {mean['empirical'][0]:.4f} vs 2 (z={mean['z'][0]:.2f})")


def test_criterion_8_selfdecomposability(suite_report):
    doc, _ = suite_report
    reps = reports_for(doc, 8)
    ok = len(reps) == 2 and all(r["passed"] and r["n"] == 20_000 for r in reps)
    record(8, ok, "; ".join(_summary(r) for r in reps))


def test_criterion_9_section3_battery(suite_report):
    doc, _ = suite_report
    reps = {r["identity"]: r for r in reports_for(doc, 9)}
    iv = reps.pop("section3-iv")
    ok = iv["passed"] and iv["constant"] is None
    ratios = []
    for r in reps.values():
        c = r["constant"]
        ok = ok and r["passed"] and c["consistent"] and sorted(abs(o) for o in c["orders"]) == [1, 2, 3]
        ratios += [p[2] for p in c["pairwise"]]
    consts = ", ".join(f"({k.split('-', 1)[1]})={r['constant']['used']:.4f}" for k, r in reps.items())
    record(9, ok and len(reps) == 4, f"(iv) p={iv['ks'][0]['p_value']:.3f} unfitted; constants {consts}; max pairwise gap {max(ratios):.2f} SE (<= 3)")


def test_criterion_10_robustness_and_determinism(suite_dir, suite_report, tmp_path_factory):
    doc, code = suite_report
    probes = {r["label"]: r for r in doc["robustness"]}
    expected = {f"{r['name']}:{k}" for r in doc["reports"] for k in r["batches"]}
    worst = max(abs(p["fine"] - p["coarse"]) / p["se"] for p in probes.values() if p["se"] > 0)
    robust_ok = set(probes) == expected and all(p["passed"] for p in probes.values())

    a, _ = suite_dir
    b = tmp_path_factory.mktemp("suite-b")
    code_b = main(["suite", "--out", str(b)])
    names = sorted(p.name for p in a.iterdir())
    same = names == sorted(p.name for p in b.iterdir())
    _, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    same = same and not mismatch and not errors and code == code_b == 0
    record(
        10,
        robust_ok and same,
        f"{len(probes)} first moments, max |fine-coarse| {worst:.2f} SE (< 2); "
        f"rerun reproduced {len(names)} files byte-for-byte: {same}; suite exit {code}",
    )
