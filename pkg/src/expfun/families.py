"""Builtin exponent families and a name registry used by the config layer."""

import math

from .levy import (
    DualExampleDensity,
    ExponentialDensity,
    ExponentialSNJumps,
    SNExponent,
    StableExampleDensity,
    SubordinatorExponent,
    TabulatedDensity,
)
from .specfun import log_gamma

__all__ = [
    "pure_drift",
    "pure_killing",
    "exponential_jump",
    "stable_example",
    "dual_example",
    "tabulated",
    "brownian",
    "brownian_exp",
    "FAMILIES",
    "build",
]


def pure_drift(b=1.0):
    """``phi(u) = b u``."""
    return SubordinatorExponent(b=b, closed_form=lambda u: b * u, name=f"pure-drift(b={b})")


def pure_killing(q=1.0):
    """``phi(u) = q``: a subordinator that stays at 0 until an Exp(q) time."""
    return SubordinatorExponent(q=q, closed_form=lambda u: q, name=f"pure-killing(q={q})")


def exponential_jump(lam=1.0, rho=1.0, b=0.0, q=0.0):
    """Compound Poisson subordinator with Exp(rho) jumps at rate `lam`.

    ``phi(u) = b u + q + lam u / (rho + u)``.
    """
    dens = ExponentialDensity(lam, rho)
    return SubordinatorExponent(
        b=b,
        q=q,
        density=dens,
        closed_form=lambda u: b * u + q + lam * u / (rho + u),
        name=f"exponential-jump(lam={lam}, rho={rho})",
    )


def stable_example(alpha=0.5):
    """``phi(u) = Γ(alpha u + 1) / Γ(alpha (u - 1) + 1)``.

    Killing rate ``1/Γ(1-alpha)`` plus the density of
    :class:`~expfun.levy.StableExampleDensity`.  The exponential functional
    is distributed as ``S(alpha)^(-alpha)``.
    """
    dens = StableExampleDensity(alpha)
    a = alpha
    return SubordinatorExponent(
        q=1.0 / math.gamma(1 - a),
        density=dens,
        closed_form=lambda u: math.exp(log_gamma(a * u + 1) - log_gamma(a * (u - 1) + 1)),
        name=f"stable-example(alpha={alpha})",
    )


def dual_example(alpha=0.5):
    """Special Bernstein partner of :func:`stable_example`: ``u / phi(u)``."""
    dens = DualExampleDensity(alpha)
    return SubordinatorExponent(
        density=dens,
        closed_form=dens.phi_closed_form,
        name=f"dual-example(alpha={alpha})",
    )


def tabulated(r, f, b=0.0, q=0.0):
    """Subordinator whose Lévy density is given on a grid."""
    return SubordinatorExponent(b=b, q=q, density=TabulatedDensity(r, f), name="tabulated")


def brownian(sigma=1.0, m=1.0):
    """``psi(u) = sigma u^2 + m u``; analytic everywhere."""
    return SNExponent(
        sigma=sigma,
        m=m,
        analytic_at_minus_one=True,
        psi_minus_one=sigma - m,
        closed_form=lambda u: sigma * u * u + m * u,
        name=f"brownian(sigma={sigma}, m={m})",
    )


def brownian_exp(sigma=0.5, m=2.0, lam=1.0, rho=2.0):
    """Brownian motion with drift plus Exp(rho) negative jumps at rate `lam`.

    ``psi(u) = sigma u^2 + m u + lam u^2 / (rho (rho + u))``; analytic at -1
    iff ``rho > 1``.
    """
    analytic = rho > 1
    return SNExponent(
        sigma=sigma,
        m=m,
        jumps=ExponentialSNJumps(lam, rho),
        analytic_at_minus_one=analytic,
        psi_minus_one=(sigma - m + lam / (rho * (rho - 1))) if analytic else None,
        closed_form=lambda u: sigma * u * u + m * u + lam * u * u / (rho * (rho + u)),
        name=f"brownian-exp(sigma={sigma}, m={m}, lam={lam}, rho={rho})",
    )


# name -> (constructor, kind, parameter names)
FAMILIES = {
    "pure-drift": (pure_drift, "subordinator", ("b",)),
    "pure-killing": (pure_killing, "subordinator", ("q",)),
    "exponential-jump": (exponential_jump, "subordinator", ("lam", "rho", "b", "q")),
    "stable-example": (stable_example, "subordinator", ("alpha",)),
    "dual-example": (dual_example, "subordinator", ("alpha",)),
    "tabulated": (tabulated, "subordinator", ("r", "f", "b", "q")),
    "brownian": (brownian, "sn", ("sigma", "m")),
    "brownian-exp": (brownian_exp, "sn", ("sigma", "m", "lam", "rho")),
}


def build(family, **params):
    """Construct a builtin exponent by registry name."""
    try:
        ctor, _, names = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    unknown = set(params) - set(names)
    if unknown:
        raise ValueError(f"family {family!r} does not take {sorted(unknown)}")
    return ctor(**params)
