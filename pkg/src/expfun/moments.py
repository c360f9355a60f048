"""Exact moment sequences of exponential functionals and entrance laws.

All products are accumulated in log space.  Elementary reference laws used by
the verification battery (gamma powers, stable powers, uniform, length-biased
stable) live here too, so every analytic target has one source.
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .specfun import log_gamma

__all__ = [
    "MAX_ORDER",
    "DegenerateExponentError",
    "MomentSequence",
    "expfun_pos_moments",
    "expfun_neg_moments",
    "entrance_moments",
    "factorization_check_analytic",
    "ratio_targets",
    "reference_moment",
]

MAX_ORDER = 20

POSITIVE = "expfun-positive"
NEGATIVE = "expfun-negative"
ENTRANCE = "entrance"


class DegenerateExponentError(ValueError):
    """The exponent vanishes (or has the wrong sign) where a moment needs it."""


@dataclass(frozen=True)
class MomentSequence:
    """Moments ``s_1..s_N`` of a positive law, stored as logs.

    Attributes
    ----------
    orders : tuple of int
    log_values : tuple of float
    source : str
        ``"expfun-positive"`` (``E[I^n]``), ``"expfun-negative"``
        (``E[I^-n]``) or ``"entrance"`` (``E[J^n]``).
    exponent : object
        The exponent the sequence was computed from.
    factors : tuple of float
        The cached exponent values ``phi(k)`` or ``psi(k)``, ``k = 1..N``.
    """

    orders: tuple
    log_values: tuple
    source: str
    exponent: Any = field(default=None, compare=False, repr=False)
    factors: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not all(np.isfinite(self.log_values)):
            raise DegenerateExponentError("moment sequence has non-finite log values")

    @property
    def values(self):
        return np.exp(np.array(self.log_values))

    def __len__(self):
        return len(self.orders)

    def __getitem__(self, n):
        """Moment of order `n` (1-based)."""
        return float(np.exp(self.log_values[n - 1]))

    def log(self, n):
        return self.log_values[n - 1]

    def hankel_determinants(self):
        """Determinants of the 2x2 and 3x3 Hankel matrices of ``(1, s1, ..., s4)``.

        Each is returned with its scale (product of the diagonal), which
        bounds the determinant of a positive semidefinite matrix.
        """
        if len(self) < 4:
            raise ValueError("Hankel check needs at least 4 moments")
        s = np.concatenate([[1.0], self.values[:4]])
        out = []
        for k in (2, 3):
            H = np.array([[s[i + j] for j in range(k)] for i in range(k)])
            out.append((float(np.linalg.det(H)), float(np.prod(np.diag(H)))))
        return out

    def hankel_ok(self, rtol=1e-8):
        return all(d >= -rtol * scale for d, scale in self.hankel_determinants())


def _check_order(N):
    if not (isinstance(N, (int, np.integer)) and 1 <= N <= MAX_ORDER):
        raise ValueError(f"moment order must be an integer in [1, {MAX_ORDER}], got {N!r}")


def _factors(exponent, N, what):
    vals = np.array([exponent.value(float(k)) for k in range(1, N + 1)])
    bad = np.flatnonzero(~(vals > 0))
    if bad.size:
        k = int(bad[0]) + 1
        raise DegenerateExponentError(f"{what}({k}) = {vals[bad[0]]!r} is not positive")
    return vals


def expfun_pos_moments(phi, N):
    """``E[I_phi^n] = n! / prod_{k<=n} phi(k)`` for ``n = 1..N``."""
    _check_order(N)
    f = _factors(phi, N, "phi")
    n = np.arange(1, N + 1)
    logs = log_gamma(n + 1.0) - np.cumsum(np.log(f))
    return MomentSequence(tuple(int(k) for k in n), tuple(logs.tolist()), POSITIVE, phi, tuple(f.tolist()))


def expfun_neg_moments(psi, N):
    """``E[I_psi^-n] = m * prod_{k<n} psi(k) / Γ(n)``; requires ``m > 0``."""
    _check_order(N)
    if not psi.m > 0:
        raise DegenerateExponentError(f"negative moments need a positive mean, got m={psi.m!r}")
    f = _factors(psi, N, "psi")
    n = np.arange(1, N + 1)
    partial = np.concatenate([[0.0], np.cumsum(np.log(f))[:-1]])
    logs = np.log(psi.m) + partial - log_gamma(n.astype(float))
    return MomentSequence(tuple(int(k) for k in n), tuple(logs.tolist()), NEGATIVE, psi, tuple(f.tolist()))


def entrance_moments(psi, N):
    """``E[J_psi^n] = prod_{k<=n} psi(k) / n!``."""
    _check_order(N)
    f = _factors(psi, N, "psi")
    n = np.arange(1, N + 1)
    logs = np.cumsum(np.log(f)) - log_gamma(n + 1.0)
    return MomentSequence(tuple(int(k) for k in n), tuple(logs.tolist()), ENTRANCE, psi, tuple(f.tolist()))


def factorization_check_analytic(phi, N):
    """Residuals ``|E[I^n] prod phi(k) - n!| / n!`` in log space, ``n = 1..N``."""
    seq = expfun_pos_moments(phi, N)
    logs = np.array(seq.log_values) + np.cumsum(np.log(seq.factors)) - log_gamma(np.arange(2, N + 2, dtype=float))
    return np.abs(np.expm1(logs))


def ratio_targets(pos, neg):
    """``E[A^n] E[B^-n]`` for independent A, B given their moment sequences."""
    N = min(len(pos), len(neg))
    return np.exp(np.array(pos.log_values[:N]) + np.array(neg.log_values[:N]))


def reference_moment(law, p, alpha=None):
    """``E[Y^p]`` for an elementary reference law.

    Parameters
    ----------
    law : str
        ``"exp"`` (Exp(1)), ``"exp-power"`` (``e^{-alpha}``),
        ``"gamma-power"`` (``G(alpha+1)^{-alpha}``), ``"stable-power"``
        (``S(alpha)^{alpha}``), ``"stable-neg-power"`` (``S(alpha)^{-alpha}``),
        ``"length-biased-stable"`` (``S_1(alpha)^{-alpha}``), ``"uniform"``,
        ``"uniform-lb-stable"`` (``U * S_1(alpha)^{-alpha}``) or
        ``"triple"`` (``U * S_1^{-alpha} * G(alpha+1)^{alpha}``).
    p : float
        Real order; must lie where the moment is finite.
    """
    a = alpha
    lg = log_gamma
    if law == "exp":
        return float(np.exp(lg(1 + p)))
    if law == "exp-power":
        return float(np.exp(lg(1 - a * p)))
    if law == "gamma-power":
        return float(np.exp(lg(a + 1 - a * p) - lg(a + 1)))
    if law == "stable-neg-power":
        return float(np.exp(lg(1 + p) - lg(1 + a * p)))
    if law == "stable-power":
        return float(np.exp(lg(1 - p) - lg(1 - a * p)))
    if law == "length-biased-stable":
        return reference_moment("stable-neg-power", p + 1, a) / reference_moment("stable-neg-power", 1, a)
    if law == "uniform":
        return 1.0 / (1.0 + p)
    if law == "uniform-lb-stable":
        return reference_moment("uniform", p) * reference_moment("length-biased-stable", p, a)
    if law == "triple":
        return (
            reference_moment("uniform-lb-stable", p, a)
            * float(np.exp(lg(a + 1 + a * p) - lg(a + 1)))
        )
    raise ValueError(f"unknown reference law {law!r}")
