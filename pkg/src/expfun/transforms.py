"""Exponent mappings between subordinators and SN processes.

Each mapping returns an exponent that carries two evaluators: the algebraic
one (``closed_form``, built from the input exponent) and the measure route
(``eval_phi`` / ``eval_psi`` on the reconstructed Lévy data).  Construction
fails unless the two agree to ``CROSS_CHECK_RTOL`` on ``CROSS_CHECK_GRID``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _quad
from .levy import (
    EvaluationError,
    ForwardJumps,
    Prop1Jumps,
    SNExponent,
    SubordinatorExponent,
    TailDerivedDensity,
    eval_phi,
    eval_psi,
    validate,
)

__all__ = [
    "TransformError",
    "CROSS_CHECK_GRID",
    "CROSS_CHECK_RTOL",
    "theorem1_forward",
    "theorem1_converse",
    "prop1_transform",
    "special_bernstein_dual",
    "BernsteinDual",
    "cross_check",
]

CROSS_CHECK_GRID = tuple(np.arange(1, 21) * 0.5)
CROSS_CHECK_RTOL = 1e-5


class TransformError(ValueError):
    """Input rejected by a transform, or its two evaluators disagree."""


def cross_check(exponent, grid=CROSS_CHECK_GRID):
    """Largest relative gap between the algebraic and measure evaluators."""
    measure = eval_phi if isinstance(exponent, SubordinatorExponent) else eval_psi
    worst = 0.0
    for u in grid:
        alg = exponent.closed_form(u)
        num = measure(exponent, u)
        worst = max(worst, abs(num - alg) / max(abs(alg), 1e-300))
    return worst


def _checked(out, what):
    try:
        gap = cross_check(out)
    except EvaluationError as exc:
        raise TransformError(f"{what}: measure route failed: {exc}") from exc
    if not gap <= CROSS_CHECK_RTOL:
        raise TransformError(
            f"{what}: algebraic and measure evaluators disagree (relative gap {gap:.3g})"
        )
    return out


def theorem1_forward(phi):
    """Map a subordinator exponent to ``psi1(u) = u * phi(u + 1)``.

    The Lévy data are ``sigma = b``, mean ``phi(1)`` and jump measure
    ``exp(r) (f(-r) dr - df(-r))`` on ``r < 0``.  ``psi1(-1) = -q``.

    Raises
    ------
    TransformError
        If `phi` fails validation (the density must be decreasing) or the two
        evaluators of the result disagree.
    """
    problems = validate(phi)
    if problems:
        raise TransformError("theorem1_forward: invalid input: " + "; ".join(problems))
    m = phi.value(1.0)
    out = SNExponent(
        sigma=phi.b,
        m=m,
        jumps=None if phi.density is None else ForwardJumps(phi.density),
        analytic_at_minus_one=True,
        psi_minus_one=-phi.q,
        closed_form=lambda u: u * phi.value(u + 1.0),
        name=f"forward[{phi.name}]",
    )
    return _checked(out, "theorem1_forward")


def theorem1_converse(psi):
    """Map an SN exponent to ``phi_{-1}(u) = psi(u - 1) / (u - 1)``.

    The result has drift ``sigma``, killing ``-psi(-1)`` and density
    ``exp(r) Pi(-inf, -r)``.  At ``u = 1`` the algebraic evaluator returns
    the limit ``m``.  Jump measures with atoms are rejected.
    """
    if not psi.analytic_at_minus_one:
        raise TransformError("theorem1_converse: psi must be analytic at -1")
    if not psi.m > 0:
        raise TransformError(f"theorem1_converse: mean must be positive, got m={psi.m!r}")
    at_m1 = psi.at_minus_one()
    if at_m1 > 1e-12:
        raise TransformError(
            f"theorem1_converse: psi(-1) = {at_m1!r} > 0 would give a negative killing rate"
        )
    J = psi.jumps
    if J is not None and J.atoms:
        raise TransformError("theorem1_converse: jump measures with atoms are not supported")
    m = psi.m

    def alg(u):
        if u == 1.0:
            return m
        return psi.value(u - 1.0) / (u - 1.0)

    out = SubordinatorExponent(
        b=psi.sigma,
        q=max(0.0, -at_m1),
        density=None if J is None else TailDerivedDensity(J),
        closed_form=alg,
        name=f"converse[{psi.name}]",
    )
    return _checked(out, "theorem1_converse")


def prop1_transform(psi):
    """Map an SN exponent to ``psi2(u) = u / (u + 1) * psi(u + 1)``.

    The mean becomes ``psi(1)``, ``sigma`` is unchanged and the jump measure
    is ``exp(r) (Pi(-inf, r) dr + Pi(dr))``.  ``psi2`` is always analytic at
    -1 with ``psi2(-1) = -m``.
    """
    problems = validate(psi)
    if problems:
        raise TransformError("prop1_transform: invalid input: " + "; ".join(problems))
    if psi.m < 0:
        raise TransformError(f"prop1_transform: mean must be >= 0, got {psi.m!r}")
    m2 = psi.value(1.0)
    if not m2 > 0:
        raise TransformError("prop1_transform: psi(1) must be positive")
    m = psi.m

    def alg(u):
        if u == -1.0:
            return -m
        return u / (u + 1.0) * psi.value(u + 1.0)

    out = SNExponent(
        sigma=psi.sigma,
        m=m2,
        jumps=None if psi.jumps is None else Prop1Jumps(psi.jumps),
        analytic_at_minus_one=True,
        psi_minus_one=-m,
        closed_form=alg,
        name=f"prop1[{psi.name}]",
    )
    return _checked(out, "prop1_transform")


@dataclass(frozen=True)
class BernsteinDual:
    """Evaluator ``u / phi(u)`` plus the outcome of a numerical Bernstein check.

    ``is_bernstein`` reports whether forward differences of orders 1..4 had
    alternating signs on the check grid; it is informational only.
    """

    phi: SubordinatorExponent
    is_bernstein: bool
    violations: tuple = field(default=())
    zero_value: float = 0.0

    def value(self, u):
        u = float(u)
        if u == 0.0:
            return self.zero_value
        return u / self.phi.value(u)

    __call__ = value


def _slope_at_zero(phi):
    """``phi'(0+) = b + int r f(r) dr`` (may be infinite)."""
    f = phi.density
    if f is None:
        return phi.b
    try:
        return phi.b + _quad.integrate_half_line(lambda r: r * f(r), what="phi'(0+)")
    except EvaluationError:
        return float("inf")


def special_bernstein_dual(phi, grid=None, h=0.25, tol=1e-6):
    """Return the evaluator ``u -> u / phi(u)`` and check it is Bernstein.

    Forward differences of order ``k = 1..4`` with step `h` must satisfy
    ``(-1)**(k+1) * Δ^k >= -tol`` at every grid point.
    """
    if grid is None:
        grid = np.arange(0.25, 10.0 + 1e-12, 0.25)
    vals = np.array([phi.value(u) for u in grid])
    if np.any(vals <= 0):
        raise TransformError("special_bernstein_dual: phi vanishes on (0, inf)")
    if phi.q > 0:
        zero = 0.0
    else:
        slope = _slope_at_zero(phi)
        zero = 0.0 if not np.isfinite(slope) or slope == 0 else 1.0 / slope
    dual = BernsteinDual(phi=phi, is_bernstein=True, zero_value=zero)
    grid = np.asarray(grid, dtype=float)
    pts = grid[:, None] + h * np.arange(5)[None, :]
    g = np.vectorize(dual.value)(pts)
    violations = []
    for k in range(1, 5):
        d = np.diff(g, n=k, axis=1)[:, 0]
        bad = (-1) ** (k + 1) * d < -tol
        if np.any(bad):
            violations.append(f"order-{k} difference has the wrong sign at u={grid[bad][0]:.4g}")
    return BernsteinDual(phi=phi, is_bernstein=not violations, violations=tuple(violations), zero_value=zero)
