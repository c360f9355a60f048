import math

import numpy as np
import pytest
from scipy import stats

from expfun import families
from expfun.moments import expfun_neg_moments, expfun_pos_moments, reference_moment
from expfun.samplers import (
    PathConfig,
    RngState,
    SampleBatch,
    sample_affine_rhs,
    sample_coupled,
    sample_entrance_law,
    sample_exponential,
    sample_gamma,
    sample_lamperti_path,
    sample_length_biased,
    sample_positive_stable,
    sample_sn_expfun,
    sample_subordinator_expfun,
    sample_uniform,
)
from expfun.transforms import theorem1_forward

from conftest import sn_families, subordinator_families

N = 100_000


def within(values, target, k):
    v = np.asarray(values, dtype=float)
    se = v.std(ddof=1) / math.sqrt(v.size)
    return abs(v.mean() - target) <= k * se


def gen(label):
    return RngState(1729).child(label).generator()


# ---------------------------------------------------------------- elementary


def test_exponential_mean():
    assert within(sample_exponential(gen("exp"), N), 1.0, 3)


def test_uniform_moments():
    u = sample_uniform(gen("unif"), N)
    assert u.min() > 0 and u.max() < 1
    for n in range(1, 5):
        assert within(u**n, 1 / (n + 1), 3)


def test_gamma_moments_and_reduction():
    g = sample_gamma(2.5, gen("gamma"), N)
    for n in (1, 2):
        assert within(g**n, math.gamma(2.5 + n) / math.gamma(2.5), 3)
    g1 = sample_gamma(1.0, gen("gamma1"), 20_000)
    e = sample_exponential(gen("exp1"), 20_000)
    assert stats.ks_2samp(g1, e).pvalue > 0.005
    with pytest.raises(ValueError):
        sample_gamma(0.0, gen("x"), 3)


def test_small_shape_gamma():
    g = sample_gamma(0.3, gen("gamma-small"), N)
    assert within(g, 0.3, 3)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_stable_negative_power_moments(alpha):
    s = sample_positive_stable(alpha, gen(f"stable-{alpha}"), N)
    for n in range(1, 5):
        assert within(s ** (-alpha * n), math.factorial(n) / math.gamma(alpha * n + 1), 3)


def test_stable_examples():
    s = sample_positive_stable(0.5, gen("stable-lt"), N)
    assert within(s**-0.5, 1.1283791671, 3)
    assert within(np.exp(-s), math.exp(-1), 3)
    edge = sample_positive_stable(0.999, gen("edge"), 1000)
    assert np.all(np.isfinite(edge)) and np.all(edge > 0)
    with pytest.raises(ValueError):
        sample_positive_stable(1.0, gen("x"), 3)


def test_length_biased_stable_moments():
    a = 0.5
    draw = lambda g, k: sample_positive_stable(a, g, k) ** (-a)
    v, info = sample_length_biased(draw, 50_000, gen("lb"))
    assert v.size == 50_000 and 0 < info["acceptance_rate"] <= 1
    for p in (1, 2):
        assert within(v**p, reference_moment("length-biased-stable", p, a), 4)


# ---------------------------------------------------------------- rng


def test_rng_determinism_and_replica_correlation():
    a = RngState(5).child("x").generator(3).random(10_000)
    b = RngState(5).child("x").generator(3).random(10_000)
    c = RngState(5).child("x").generator(4).random(10_000)
    assert np.array_equal(a, b)
    assert abs(np.corrcoef(a, c)[0, 1]) < 0.01


def test_stream_correlations_across_many_pairs():
    # |rho| < 0.01 is one standard error at 1e4 draws, so across many pairs use 4 standard errors
    streams = [RngState(1729).child(lab).generator(k).random(10_000) for lab in ("a", "b") for k in range(5)]
    rho = np.corrcoef(np.array(streams))[np.triu_indices(len(streams), 1)]
    assert np.max(np.abs(rho)) < 0.04
    assert abs(rho.mean()) < 0.01


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5])
def test_rng_seed_validation(seed):
    with pytest.raises(ValueError):
        RngState(seed)


def test_path_config():
    cfg = PathConfig()
    assert cfg.as_dict() == {"eps": 1e-3, "dt": 1e-3, "tail_tol": 1e-6, "max_time": 1e4, "x0": 1e-3}
    h = cfg.halved()
    assert (h.eps, h.dt, h.tail_tol) == (5e-4, 5e-4, 1e-6)
    with pytest.raises(ValueError):
        PathConfig(dt=0.0)
    with pytest.raises(ValueError):
        PathConfig(eps=float("nan"))


def test_sample_batch_basics():
    b = SampleBatch([1.0, 2.0])
    assert b.valid and len(b) == 2 and b.truncated_fraction == 0.0
    assert not SampleBatch([1.0, -1.0]).valid
    assert b.map(np.reciprocal, "inverse").values.tolist() == [1.0, 0.5]


# ---------------------------------------------------------------- subordinators


def test_pure_drift_functional_is_one():
    b = sample_subordinator_expfun(families.pure_drift(1.0), None, RngState(1), 1000)
    np.testing.assert_allclose(b.values, 1.0, rtol=1e-6)


def test_pure_killing_is_exponential():
    q = 2.0
    b = sample_subordinator_expfun(families.pure_killing(q), None, RngState(2), 20_000)
    assert stats.kstest(b.values, "expon", args=(0, 1 / q)).pvalue > 0.005


def test_exponential_jump_mean():
    phi = families.exponential_jump()
    b = sample_subordinator_expfun(phi, None, RngState(3), 50_000)
    assert within(b.values, expfun_pos_moments(phi, 1)[1], 3)


def test_stable_subordinator_mean():
    phi = families.stable_example(0.5)
    b = sample_subordinator_expfun(phi, None, RngState(4), 20_000)
    assert within(b.values, expfun_pos_moments(phi, 1)[1], 3)


# ---------------------------------------------------------------- SN


def test_deterministic_sn_functional():
    b = sample_sn_expfun(families.brownian(0.0, 2.0), None, RngState(5), 100)
    np.testing.assert_allclose(b.values, 0.5, rtol=1e-5)


def test_brownian_negative_moments():
    psi = families.brownian(1.0, 1.0)
    b = sample_sn_expfun(psi, None, RngState(6), 20_000)
    assert within(1 / b.values, 1.0, 3)
    assert within(b.values**-2, 2.0, 4)
    assert b.diagnostics["truncated_fraction"] < 0.01
    assert not b.diagnostics["step_warning"]


def test_exact_engine_for_finite_activity():
    psi = theorem1_forward(families.exponential_jump())
    b = sample_sn_expfun(psi, None, RngState(7), 20_000)
    assert b.meta["engine"] == "event"
    assert within(1 / b.values, expfun_neg_moments(psi, 1)[1], 3)


def test_sn_rejects_nonpositive_mean():
    with pytest.raises(ValueError):
        sample_sn_expfun(families.brownian(1.0, 0.0), None, RngState(1), 10)


@pytest.mark.parametrize(
    "e", subordinator_families() + sn_families(), ids=lambda e: e.name
)
def test_truncation_fraction_small_at_default(e):
    fn = sample_sn_expfun if hasattr(e, "sigma") else sample_subordinator_expfun
    b = fn(e, None, RngState(8), 2000)
    assert b.valid
    assert b.diagnostics["truncated_fraction"] < 0.01


# ---------------------------------------------------------------- Lamperti, entrance, affine


def test_lamperti_deterministic_drift():
    b = sample_lamperti_path(families.brownian(0.0, 1.0), 2.0, 3.0, None, RngState(9), 50)
    np.testing.assert_allclose(b.values, 5.0, rtol=1e-3)


def test_lamperti_self_similarity():
    psi = families.brownian(1.0, 1.0)
    a = sample_lamperti_path(psi, 1.0, 1.0, None, RngState(10), 5000)
    b = sample_lamperti_path(psi, 2.0, 2.0, None, RngState(11), 5000)
    assert stats.ks_2samp(2 * a.values, b.values).pvalue > 0.005


def test_entrance_law_examples():
    cfg = PathConfig()
    j = sample_entrance_law(families.brownian(0.0, 1.0), cfg, RngState(12), 100)
    np.testing.assert_allclose(j.values, 1 + cfg.x0, rtol=1e-3)
    j2 = sample_entrance_law(families.brownian(1.0, 1.0), cfg, RngState(13), 5000)
    assert within(j2.values, 2.0, 4)


def test_affine_deterministic_case_is_exact():
    b = sample_affine_rhs(families.brownian(0.0, 1.0), 1.0, None, RngState(14), 100)
    np.testing.assert_allclose(b.values, 1.0, rtol=1e-3)


def test_affine_matches_functional_for_large_y():
    psi = families.brownian(1.0, 1.0)
    a = sample_affine_rhs(psi, 5.0, None, RngState(15), 5000)
    b = sample_sn_expfun(psi, None, RngState(16), 5000)
    assert stats.ks_2samp(a.values, b.values).pvalue > 0.005


def test_samplers_are_deterministic():
    psi = families.brownian(1.0, 1.0)
    a = sample_sn_expfun(psi, None, RngState(17), 3000)
    b = sample_sn_expfun(psi, None, RngState(17), 3000)
    assert np.array_equal(a.values, b.values)
    assert a.meta == b.meta


def test_coupled_runs_share_randomness():
    psi = families.brownian(1.0, 1.0)
    coarse, fine = sample_coupled("sn", psi, None, RngState(18), 3000)
    assert coarse.meta["config"]["dt"] == 2 * fine.meta["config"]["dt"]
    assert np.corrcoef(coarse.values, fine.values)[0, 1] > 0.99
    with pytest.raises(ValueError):
        sample_coupled("nope", psi, None, RngState(1), 10)
