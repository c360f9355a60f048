"""Quadrature helpers for Lévy–Khintchine integrals on the half-line."""

import warnings

import numpy as np
from scipy import integrate

ABS_TOL = 1e-10
REL_TOL = 1e-8
# log-substituted inner piece is cut at r = split * exp(-LOG_CUTOFF); jump
# densities handled here are O(r^-3) at worst, which stays finite there
LOG_CUTOFF = 200.0


class EvaluationError(ArithmeticError):
    """A quadrature failed to reach the requested accuracy."""


def _quad(g, a, b, what):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, *rest = integrate.quad(
            g, a, b, epsabs=1e-13, epsrel=1e-11, limit=500, full_output=1
        )
    if not np.isfinite(val) or err > max(ABS_TOL, REL_TOL * abs(val)):
        raise EvaluationError(
            f"{what}: quadrature did not converge (value={val!r}, error={err!r})"
        )
    return val, err


def integrate_half_line(g, split=1.0, what="integral", breaks=()):
    """Integrate ``g`` over ``(0, inf)``.

    The integral is split at `split`.  On ``(0, split]`` the substitution
    ``r = split * exp(-s)`` removes algebraic endpoint singularities; the
    outer piece goes straight to QUADPACK's infinite-interval rule.  The
    Kronrod error estimate of each piece must satisfy an absolute tolerance
    of 1e-10 or a relative tolerance of 1e-8, otherwise
    :class:`EvaluationError` is raised.

    `breaks` lists points where ``g`` has kinks (tabulated data); the range
    between the first and last break is then integrated panel by panel and
    `split` is replaced by the first break.
    """
    pts = np.unique(np.asarray(breaks, dtype=float))
    if pts.size >= 2:
        total = integrate_interval(g, 0.0, pts[0], what)
        for a, b in zip(pts[:-1], pts[1:]):
            total += _quad(g, a, b, what)[0]
        return total + _quad(g, pts[-1], np.inf, what)[0]

    def inner(s):
        r = split * np.exp(-s)
        return g(r) * r

    v_in, _ = _quad(inner, 0.0, LOG_CUTOFF, what)
    v_out, _ = _quad(g, split, np.inf, what)
    return v_in + v_out


def integrate_interval(g, a, b, what="integral", breaks=()):
    """Integrate ``g`` over a finite interval ``[a, b]`` with ``0 <= a < b``.

    When ``a == 0`` the log substitution is applied as in
    :func:`integrate_half_line`.  Interior `breaks` split the range.
    """
    if b <= a:
        return 0.0
    inner_pts = [x for x in np.unique(np.asarray(breaks, dtype=float)) if a < x < b]
    if inner_pts:
        edges = [a] + inner_pts + [b]
        return sum(integrate_interval(g, lo, hi, what) for lo, hi in zip(edges[:-1], edges[1:]))
    if a == 0.0:
        def inner(s):
            r = b * np.exp(-s)
            return g(r) * r

        return _quad(inner, 0.0, LOG_CUTOFF, what)[0]
    if b / a > 10.0:
        # geometric split keeps the Kronrod panels well scaled
        u0, u1 = np.log(a), np.log(b)
        return _quad(lambda u: g(np.exp(u)) * np.exp(u), u0, u1, what)[0]
    return _quad(g, a, b, what)[0]


def integrate_tail(g, a, what="integral", breaks=()):
    """Integrate ``g`` over ``[a, inf)`` for ``a > 0``."""
    pts = [x for x in np.unique(np.asarray(breaks, dtype=float)) if x > a]
    if pts:
        return integrate_interval(g, a, pts[-1], what, pts) + _quad(g, pts[-1], np.inf, what)[0]
    return _quad(g, a, np.inf, what)[0]
