"""Exact samplers for the elementary laws: Exp(1), U(0,1), gamma, positive stable."""

import numpy as np

from .rng import as_generator

__all__ = [
    "sample_exponential",
    "sample_uniform",
    "sample_gamma",
    "sample_positive_stable",
    "sample_length_biased",
]


def sample_exponential(rng, size=None):
    """Standard exponential draws (mean 1)."""
    return as_generator(rng).standard_exponential(size)


def sample_uniform(rng, size=None):
    """Uniform draws on the open interval (0, 1)."""
    gen = as_generator(rng)
    k = gen.integers(0, 2**53, size=size, dtype=np.int64)
    return (k + 0.5) / 2.0**53


def sample_gamma(a, rng, size=None):
    """Gamma(a, 1) draws, so ``E[G(a)] = a``.

    Delegates to NumPy's Marsaglia–Tsang rejection sampler, which handles
    ``a < 1`` by the usual ``G(a+1) * U**(1/a)`` boost.
    """
    if not a > 0:
        raise ValueError(f"gamma shape must be positive, got {a!r}")
    return as_generator(rng).standard_gamma(a, size)


def sample_positive_stable(alpha, rng, size=None):
    """Positive alpha-stable draws with ``E[exp(-t S)] = exp(-t**alpha)``.

    Kanter's representation: with ``U ~ U(0, pi)`` and ``E ~ Exp(1)``,

        S = (A(U) / E) ** ((1 - alpha) / alpha),
        A(u) = sin(alpha u)**(alpha/(1-alpha)) sin((1-alpha) u) / sin(u)**(1/(1-alpha)).

    Evaluated in log space so that ``alpha`` close to 1 stays finite.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"stable index must lie in (0, 1), got {alpha!r}")
    gen = as_generator(rng)
    u = np.pi * sample_uniform(gen, size)
    e = gen.standard_exponential(size)
    a = alpha
    log_a = (
        a / (1 - a) * np.log(np.sin(a * u))
        + np.log(np.sin((1 - a) * u))
        - np.log(np.sin(u)) / (1 - a)
    )
    return np.exp((1 - a) / a * (log_a - np.log(e)))


def sample_length_biased(draw, n, rng, cap_quantile=0.9999, pilot=100_000):
    """Length-biased draws by acceptance–rejection.

    `draw(gen, k)` must return `k` positive draws from the unbiased law.  A
    candidate ``w`` is accepted with probability ``min(w, cap) / cap``; `cap`
    is the `cap_quantile` of a pilot sample, so weights above it are
    truncated.  Returns ``(values, info)`` with the cap and acceptance rate.
    """
    gen = as_generator(rng)
    cap = float(np.quantile(draw(gen, pilot), cap_quantile))
    out = []
    have = 0
    tried = 0
    accepted = 0
    while have < n:
        k = max(1024, 4 * (n - have))
        w = draw(gen, k)
        acc = gen.random(k) * cap < np.minimum(w, cap)
        tried += k
        accepted += int(acc.sum())
        out.append(w[acc])
        have += int(acc.sum())
    vals = np.concatenate(out)[:n]
    return vals, {"cap": cap, "cap_quantile": cap_quantile, "acceptance_rate": accepted / tried}
