import math

import numpy as np
import pytest

from expfun import families
from expfun import verify as V
from expfun.samplers import RngState, SampleBatch, sample_exponential, sample_uniform
from expfun.transforms import theorem1_forward


def exp_draws(n, label="e"):
    return sample_exponential(RngState(1729).child(label).generator(), n)


# ---------------------------------------------------------------- KS


def test_ks_exp1_accepts_exponential():
    r = V.ks_test_exp1(exp_draws(10_000))
    assert r.p_value > 0.001 and r.passed
    assert 0 <= r.statistic <= 1 and r.sizes == (10_000,)


def test_ks_exp1_rejects_constant():
    r = V.ks_test_exp1(np.ones(1000))
    assert r.p_value < 1e-12 and not r.passed


def test_ks_statistic_matches_scipy():
    from scipy import stats

    x = exp_draws(2000, "cmp")
    y = exp_draws(3000, "cmp2") * 1.1
    assert V.ks_test_exp1(x).statistic == pytest.approx(stats.kstest(x, "expon").statistic, abs=1e-15)
    assert V.ks_two_sample(x, y).statistic == pytest.approx(stats.ks_2samp(x, y).statistic, abs=1e-15)


def test_ks_two_sample_same_batch():
    x = exp_draws(500)
    r = V.ks_two_sample(x, x)
    assert r.statistic == 0.0 and r.p_value == 1.0


def test_ks_two_sample_degenerate():
    r = V.ks_two_sample(np.ones(200), np.full(300, 1.001))
    assert r.degenerate and r.passed
    r2 = V.ks_two_sample(np.ones(200), np.full(300, 2.0))
    assert r2.degenerate and not r2.passed


def test_ks_rejects_small_batches():
    with pytest.raises(ValueError):
        V.ks_test_exp1(np.ones(99))
    with pytest.raises(ValueError):
        V.ks_two_sample(np.ones(100), np.ones(50))


# ---------------------------------------------------------------- moments


def test_empirical_moments_examples():
    e = exp_draws(100_000)
    r = V.empirical_moments(SampleBatch(e), [2], [2.0])
    assert abs(r.z[0]) <= 3
    u = sample_uniform(RngState(3).generator(), 100_000)
    r = V.empirical_moments(u, [3], [0.25])
    assert abs(r.z[0]) <= 3
    assert all(s > 0 for s in r.se)


def test_empirical_moments_constant_batch():
    r = V.empirical_moments(np.ones(1000), [1, 2, -3], [1.0, 1.0, 1.0])
    assert r.empirical == [1.0, 1.0, 1.0]
    assert r.se == [0.0, 0.0, 0.0]
    assert r.degenerate and r.passed
    assert all(math.isfinite(z) for z in r.z)


def test_empirical_moments_errors_and_failures():
    with pytest.raises(ValueError):
        V.empirical_moments(np.array([]), [1])
    r = V.empirical_moments(exp_draws(10_000), [1], [1.5])
    assert not r.passed


# ---------------------------------------------------------------- fitted constants


def test_fit_constant_recovers_scale():
    y = exp_draws(100_000, "fit")
    fit = V.fit_constant(3.0 * y, [math.factorial(p) for p in (1, 2, 3)], [1, 2, 3])
    assert fit.used == pytest.approx(3.0, rel=0.02)
    assert fit.consistent
    assert all(abs(c - 3.0) <= 4 * s for c, s in zip(fit.fitted, fit.se))


def test_fit_constant_detects_wrong_shape():
    # uniform draws against exponential reference moments: orders disagree
    u = sample_uniform(RngState(9).generator(), 100_000)
    fit = V.fit_constant(u, [1.0, 2.0, 6.0], [1, 2, 3])
    assert not fit.consistent


# ---------------------------------------------------------------- pipelines at small N


def test_nfe_pure_drift_reduces_to_sn_functional():
    rep = V.verify_nfe(families.pure_drift(), 5000, 1729)
    assert rep.passed
    np.testing.assert_allclose(rep.samples["subordinator"], 1.0, rtol=1e-6)
    np.testing.assert_allclose(rep.samples["ratio"], 1 / rep.samples["sn"], rtol=1e-6)
    assert rep.notes["analytic_target_residual"] <= 1e-12


def test_nfe2_roundtrip_consistency():
    psi = theorem1_forward(families.exponential_jump())
    rep = V.verify_nfe2(psi, 5000, 1729)
    assert rep.passed


def test_prop1_trivial_pass_for_linear_psi():
    rep = V.verify_prop1(families.brownian(0.0, 1.0), 2000, 1729)
    assert rep.passed
    assert rep.ks[0].degenerate


def test_selfdecomp_deterministic_drift():
    rep = V.verify_selfdecomp(families.brownian(0.0, 1.0), 1.0, 1000, 1729)
    assert rep.passed and rep.ks[0].degenerate


def test_section3_small_run_structure():
    reps = V.verify_section3(0.5, 3000, 1729)
    assert [r.identity for r in reps] == ["section3-i", "section3-ii", "section3-iii", "section3-iv", "section3-v"]
    assert reps[3].constant is None
    for r in reps[:3] + reps[4:]:
        assert r.constant is not None and len(r.constant.pairwise) == 3
    assert "cap" in reps[2].notes["length_bias"]


def test_report_pass_flag_is_conjunction():
    rep = V.verify_nfe(families.exponential_jump(), 2000, 1729)
    parts = [k.passed for k in rep.ks] + [m.passed for m in rep.moments] + [rep.diagnostics_ok]
    assert rep.passed == all(parts)
    rep.moments[0].z[0] = 99.0
    assert not rep.passed
    assert rep.to_dict()["passed"] is False


def test_reports_are_reproducible():
    a = V.verify_prop1(families.brownian(1.0, 1.0), 1000, 7).to_dict()
    b = V.verify_prop1(families.brownian(1.0, 1.0), 1000, 7).to_dict()
    assert a == b


def test_discretization_check_point_mass():
    rr = V.discretization_check("subordinator", families.pure_drift(), 1, 500, 1729)
    assert rr.se == 0.0 and rr.passed


def test_discretization_check_brownian():
    rr = V.discretization_check("sn", families.brownian(1.0, 1.0), -1, 5000, 1729)
    assert rr.passed
    assert rr.to_dict()["passed"] is True
