import math

import mpmath
import numpy as np
import pytest
from scipy.special import kolmogorov

from expfun.specfun import kolmogorov_sf, log_gamma, log_gamma_ratio


@pytest.mark.parametrize(
    "x, expected",
    [(1.0, 0.0), (6.0, 4.787491742782046), (0.5, 0.5723649429247001)],
)
def test_log_gamma_known_values(x, expected):
    assert log_gamma(x) == pytest.approx(expected, abs=1e-14)


def test_log_gamma_matches_mpmath_on_wide_grid():
    xs = np.geomspace(1e-3, 1e3, 301)
    got = np.array([log_gamma(x) for x in xs])
    want = np.array([float(mpmath.loggamma(mpmath.mpf(x))) for x in xs])
    err = np.abs(got - want) / np.maximum(1.0, np.abs(want))
    assert err.max() <= 1e-12


def test_log_gamma_recurrence():
    xs = np.arange(1, 501) * 0.1
    for x in xs:
        assert abs(log_gamma(x + 1) - log_gamma(x) - math.log(x)) <= 1e-11


def test_log_gamma_vectorized():
    xs = np.array([0.5, 1.0, 6.0])
    np.testing.assert_allclose(log_gamma(xs), [log_gamma(x) for x in xs])


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_log_gamma_domain(x):
    with pytest.raises(ValueError):
        log_gamma(x)


def test_log_gamma_ratio():
    assert log_gamma_ratio(5.0, 3.0) == pytest.approx(math.log(12.0), abs=1e-13)


def test_kolmogorov_sf_edges():
    assert kolmogorov_sf(0.0) == 1.0
    assert kolmogorov_sf(10.0) <= 1e-12


def test_kolmogorov_sf_at_one_against_high_precision_series():
    mpmath.mp.dps = 30
    series = 2 * mpmath.nsum(lambda k: (-1) ** (k - 1) * mpmath.exp(-2 * k**2), [1, mpmath.inf])
    mpmath.mp.dps = 15
    assert kolmogorov_sf(1.0) == pytest.approx(float(series), abs=1e-12)
    assert kolmogorov_sf(1.0) == pytest.approx(0.27, abs=0.005)


def test_kolmogorov_sf_matches_scipy():
    xs = np.linspace(0.2, 3.0, 57)
    np.testing.assert_allclose([kolmogorov_sf(x) for x in xs], kolmogorov(xs), atol=1e-11)


def test_kolmogorov_sf_monotone_and_clamped():
    vals = np.array([kolmogorov_sf(x) for x in np.linspace(0, 5, 1000)])
    assert np.all(np.diff(vals) <= 0)
    assert vals.min() >= 0 and vals.max() <= 1
