"""Laplace exponents of subordinators and spectrally negative Lévy processes.

A subordinator exponent is

    phi(u) = b*u + q + int_0^inf (1 - exp(-u r)) f(r) dr,

and a spectrally negative (SN) exponent is

    psi(u) = sigma*u**2 + m*u + int_{-inf}^0 (exp(u r) - 1 - u r) Pi(dr).

Both are stored as immutable Lévy data.  ``eval_phi`` and ``eval_psi``
always integrate the Lévy–Khintchine representation; exponents built from a
closed form (builtin families, transform outputs) additionally carry that
closed form, and :meth:`SubordinatorExponent.value` / :meth:`SNExponent.value`
prefer it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import _quad
from ._quad import EvaluationError
from .specfun import log_gamma

__all__ = [
    "EvaluationError",
    "LevyDensity",
    "ExponentialDensity",
    "StableExampleDensity",
    "DualExampleDensity",
    "TabulatedDensity",
    "TailDerivedDensity",
    "SNJumpMeasure",
    "ExponentialSNJumps",
    "ForwardJumps",
    "Prop1Jumps",
    "SubordinatorExponent",
    "SNExponent",
    "eval_phi",
    "eval_psi",
    "eval_psi_by_tail",
    "levy_tail",
    "levy_tail_quad",
    "validate",
    "VALIDATION_GRID",
]

VALIDATION_GRID = np.logspace(-6, 3, 200)


def one_minus_exp(x):
    """``1 - exp(-x)`` without cancellation."""
    return -np.expm1(-x)


def exp_m1_mx(x):
    """``exp(x) - 1 - x`` without cancellation near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    xs = np.where(small, x, 0.0)
    series = xs * xs * (0.5 + xs * (1 / 6 + xs * (1 / 24 + xs * (1 / 120 + xs / 720))))
    xl = np.where(small, 1.0, x)
    out = np.where(small, series, np.expm1(xl) - xl)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# subordinator Lévy densities
# ---------------------------------------------------------------------------


class LevyDensity:
    """A Lévy density ``f`` on ``(0, inf)``.

    Subclasses implement ``__call__`` and ``derivative``; closed-form tails and
    inverse tails are optional.  Downward discontinuities are listed in
    :attr:`jumps` as ``(location, size)`` pairs.
    """

    name = "density"
    jumps: tuple = ()
    # kinks of f, used to split quadrature panels
    breakpoints: tuple = ()

    def __call__(self, r):
        raise NotImplementedError

    def derivative(self, r):
        raise NotImplementedError

    def at_zero(self):
        """Limit ``f(0+)`` (may be ``inf``)."""
        return math.inf

    def tail(self, r):
        out = np.vectorize(lambda x: levy_tail_quad(self, x), otypes=[float])(r)
        return float(out) if out.ndim == 0 else out

    def inverse_tail(self, t):
        """Solve ``tail(r) = t`` for ``r``; ``None`` when not available."""
        return None

    @cached_property
    def total_mass(self):
        try:
            return float(self.tail(0.0))
        except EvaluationError:
            return math.inf

    @property
    def finite_activity(self):
        return math.isfinite(self.total_mass)

    def phi_closed_form(self, u):
        """Closed form of ``int (1 - exp(-u r)) f(r) dr`` if known."""
        return None

    def params(self):
        return {}


@dataclass(frozen=True)
class ExponentialDensity(LevyDensity):
    """``f(r) = lam * rho * exp(-rho r)``."""

    lam: float
    rho: float
    name = "exponential-jump"

    def __post_init__(self):
        if not (self.lam > 0 and self.rho > 0):
            raise ValueError("exponential-jump density needs lam > 0 and rho > 0")

    def __call__(self, r):
        return self.lam * self.rho * np.exp(-self.rho * np.asarray(r, dtype=float))

    def derivative(self, r):
        return -self.rho * self(r)

    def at_zero(self):
        return self.lam * self.rho

    def tail(self, r):
        return self.lam * np.exp(-self.rho * np.asarray(r, dtype=float))

    def inverse_tail(self, t):
        return -np.log(np.asarray(t, dtype=float) / self.lam) / self.rho

    @property
    def total_mass(self):
        return self.lam

    def phi_closed_form(self, u):
        return self.lam * u / (self.rho + u)

    def params(self):
        return {"lam": self.lam, "rho": self.rho}


@dataclass(frozen=True)
class StableExampleDensity(LevyDensity):
    """``f(r) = exp(-r/a) / (Γ(1-a) (1 - exp(-r/a))^(a+1))`` for ``0 < a < 1``.

    Together with killing rate ``1/Γ(1-a)`` this is the subordinator whose
    exponential functional is ``S(a)^(-a)``.
    """

    alpha: float
    name = "stable-example"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("stable-example needs 0 < alpha < 1")

    @property
    def _g(self):
        return math.gamma(1 - self.alpha)

    def __call__(self, r):
        a = self.alpha
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.exp(-r / a) / (self._g * one_minus_exp(r / a) ** (a + 1))

    def derivative(self, r):
        a = self.alpha
        r = np.asarray(r, dtype=float)
        x = np.exp(-r / a)
        with np.errstate(divide="ignore", over="ignore"):
            return -(x / a) * (1 + a * x) / (self._g * one_minus_exp(r / a) ** (a + 2))

    def tail(self, r):
        a = self.alpha
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.expm1(-a * np.log(one_minus_exp(r / a))) / self._g

    def inverse_tail(self, t):
        a = self.alpha
        t = np.asarray(t, dtype=float)
        y = np.exp(-np.log1p(t * self._g) / a)  # = 1 - exp(-r/a)
        return -a * np.log1p(-y)

    def phi_closed_form(self, u):
        a = self.alpha
        return math.exp(log_gamma(a * u + 1) - log_gamma(a * (u - 1) + 1)) - 1 / self._g

    def params(self):
        return {"alpha": self.alpha}


@dataclass(frozen=True)
class DualExampleDensity(LevyDensity):
    """``f(r) = (1-a) exp(r/a) / (a Γ(a+1) (exp(r/a) - 1)^(2-a))``.

    Its exponent is ``u Γ(a(u-1)+1) / Γ(a u + 1)``, the special Bernstein
    partner of the stable example.
    """

    alpha: float
    name = "dual-example"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("dual-example needs 0 < alpha < 1")

    @property
    def _c(self):
        a = self.alpha
        return (1 - a) / (a * math.gamma(a + 1))

    def __call__(self, r):
        a = self.alpha
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            w = np.expm1(r / a)
            # (w + 1) w^(a-2), written to stay finite for large r
            out = self._c * (1 + 1 / w) * w ** (a - 1)
        return np.where(r > 0, out, np.inf)

    def derivative(self, r):
        a = self.alpha
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            w = np.expm1(r / a)
            return self._c * (1 + 1 / w) * w ** (a - 1) * ((a - 1) + (a - 2) / w) / a

    def tail(self, r):
        a = self.alpha
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.expm1(r / a) ** (a - 1) / math.gamma(a + 1)

    def inverse_tail(self, t):
        a = self.alpha
        t = np.asarray(t, dtype=float)
        w = (t * math.gamma(a + 1)) ** (1 / (a - 1))
        return a * np.log1p(w)

    def phi_closed_form(self, u):
        a = self.alpha
        if u == 0:
            return 0.0
        return u * math.exp(log_gamma(a * (u - 1) + 1) - log_gamma(a * u + 1))

    def params(self):
        return {"alpha": self.alpha}


class TabulatedDensity(LevyDensity):
    """Density given on a grid, interpolated linearly in log-log space.

    Beyond the grid the density follows the first (resp. last) segment's
    log-slope.  A repeated abscissa encodes a downward jump: the first value
    is the left limit, the second the right limit.
    """

    name = "tabulated"

    def __init__(self, r, f):
        r = np.asarray(r, dtype=float)
        f = np.asarray(f, dtype=float)
        if r.ndim != 1 or r.shape != f.shape or r.size < 2:
            raise ValueError("tabulated density needs matching 1-d arrays of length >= 2")
        if np.any(r <= 0) or np.any(f <= 0) or not np.all(np.isfinite(f)):
            raise ValueError("tabulated abscissae and values must be positive and finite")
        if np.any(np.diff(r) < 0):
            raise ValueError("tabulated abscissae must be non-decreasing")
        self.r = r
        self.f = f
        lr, lf = np.log(r), np.log(f)
        starts, l0, f0, slopes, jumps = [], [], [], [], []
        for i in range(r.size - 1):
            if r[i + 1] == r[i]:
                jumps.append((float(r[i]), float(f[i] - f[i + 1])))
                continue
            starts.append(lr[i])
            l0.append(lr[i])
            f0.append(lf[i])
            slopes.append((lf[i + 1] - lf[i]) / (lr[i + 1] - lr[i]))
        if not slopes:
            raise ValueError("tabulated density needs two distinct abscissae")
        # left extension shares the first segment's slope, right extension the last
        self._starts = np.array([-np.inf] + starts + [lr[-1]])
        self._l0 = np.array([l0[0]] + l0 + [lr[-1]])
        self._f0 = np.array([f0[0]] + f0 + [lf[-1]])
        self._slopes = np.array([slopes[0]] + slopes + [slopes[-1]])
        ends = np.append(self._starts[1:], np.inf)
        self._ends = ends
        self.jumps = tuple(jumps)
        self.breakpoints = tuple(np.unique(r).tolist())
        self._seg_mass = np.array(
            [self._segment_integral(k, self._starts[k], ends[k]) for k in range(len(ends))]
        )

    def _segment(self, lx):
        k = np.searchsorted(self._starts, lx, side="right") - 1
        return np.clip(k, 0, len(self._starts) - 1)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            lx = np.log(r)
        k = self._segment(lx)
        return np.exp(self._f0[k] + self._slopes[k] * (lx - self._l0[k]))

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        k = self._segment(np.log(r))
        return self._slopes[k] * self(r) / r

    def at_zero(self):
        s = self._slopes[0]
        if s < 0:
            return math.inf
        return float(self.f[0]) if s == 0 else 0.0

    def _segment_integral(self, k, la, lb):
        """Integral of the k-th power-law piece between log-abscissae la < lb."""
        s, l0, f0 = self._slopes[k], self._l0[k], self._f0[k]
        if lb <= la:
            return 0.0
        if abs(s + 1) < 1e-12:
            return math.inf if not (np.isfinite(la) and np.isfinite(lb)) else math.exp(f0 + l0) * (lb - la)
        e = s + 1

        def prim(lx):
            if lx == -np.inf:
                return 0.0 if e > 0 else -math.inf
            if lx == np.inf:
                return math.inf if e > 0 else 0.0
            return math.exp(f0 - s * l0 + e * lx) / e

        hi, lo = prim(lb), prim(la)
        if math.isinf(hi) or math.isinf(lo):
            return math.inf
        return hi - lo

    def _tail_scalar(self, r):
        if r <= 0:
            return float(np.sum(self._seg_mass)) if np.all(np.isfinite(self._seg_mass)) else math.inf
        lx = math.log(r)
        k = int(self._segment(lx))
        rest = self._seg_mass[k + 1:]
        if not np.all(np.isfinite(rest)):
            return math.inf
        return self._segment_integral(k, lx, self._ends[k]) + float(np.sum(rest))

    def tail(self, r):
        r = np.asarray(r, dtype=float)
        out = np.vectorize(self._tail_scalar, otypes=[float])(r)
        return float(out) if out.ndim == 0 else out

    def params(self):
        return {"r": self.r.tolist(), "f": self.f.tolist()}


class TailDerivedDensity(LevyDensity):
    """``f(r) = exp(r) * Pi(-inf, -r)`` built from an SN jump measure."""

    name = "tail-derived"

    def __init__(self, jumps):
        if jumps.atoms:
            raise ValueError("tail-derived densities do not accept jump measures with atoms")
        self.source = jumps
        self.breakpoints = jumps.breakpoints

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        T = self.source.tail(-r)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(T == 0, 0.0, np.exp(r) * T)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        d = self.source.tail(-r) - self.source.density(-r)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(d == 0, 0.0, np.exp(r) * d)

    def at_zero(self):
        return self.source.total_mass

    @cached_property
    def total_mass(self):
        if not self.source.finite_activity:
            return math.inf
        return levy_tail_quad(self, 0.0)

    def params(self):
        return {"source": self.source.describe()}


# ---------------------------------------------------------------------------
# SN jump measures on (-inf, 0)
# ---------------------------------------------------------------------------


class SNJumpMeasure:
    """Lévy measure of an SN process: density on ``r < 0`` plus atoms.

    ``tail(r)`` is ``Pi(-inf, r]`` for ``r <= 0``; ``tail(0)`` is the total
    mass.
    """

    atoms: tuple = ()
    # kinks of the density, as magnitudes |r|
    breakpoints: tuple = ()

    def density(self, r):
        raise NotImplementedError

    def tail(self, r):
        raise NotImplementedError

    @cached_property
    def total_mass(self):
        return float(self.tail(0.0))

    @property
    def finite_activity(self):
        return math.isfinite(self.total_mass)

    def describe(self):
        return {"kind": type(self).__name__}


@dataclass(frozen=True)
class ExponentialSNJumps(SNJumpMeasure):
    """``Pi(dr) = lam * rho * exp(rho r) dr`` on ``r < 0``."""

    lam: float
    rho: float

    def __post_init__(self):
        if not (self.lam > 0 and self.rho > 0):
            raise ValueError("exponential SN jumps need lam > 0 and rho > 0")

    def density(self, r):
        return self.lam * self.rho * np.exp(self.rho * np.asarray(r, dtype=float))

    def tail(self, r):
        return self.lam * np.exp(self.rho * np.asarray(r, dtype=float))

    @property
    def total_mass(self):
        return self.lam

    def describe(self):
        return {"kind": "exponential", "lam": self.lam, "rho": self.rho}


class ForwardJumps(SNJumpMeasure):
    """``Pi(dr) = exp(r) (f(-r) dr - df(-r))`` for a decreasing density ``f``."""

    def __init__(self, base):
        self.base = base
        self.atoms = tuple((-x, math.exp(-x) * d) for x, d in base.jumps)
        self.breakpoints = base.breakpoints

    def density(self, r):
        x = -np.asarray(r, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(-x) * (self.base(x) - self.base.derivative(x))
        return out

    def tail(self, r):
        x = -np.asarray(r, dtype=float)
        if np.ndim(x) == 0 and x == 0:
            return self.base.at_zero()
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(-x) * self.base(x)

    @property
    def total_mass(self):
        return self.base.at_zero()

    def describe(self):
        return {"kind": "forward", "base": self.base.name, **self.base.params()}


class Prop1Jumps(SNJumpMeasure):
    """``exp(r) (Pi(-inf, r) dr + Pi(dr))`` built from another SN measure."""

    def __init__(self, base):
        self.base = base
        self.atoms = tuple((r, math.exp(r) * w) for r, w in base.atoms)
        self.breakpoints = base.breakpoints

    def density(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(r) * (self.base.tail(r) + self.base.density(r))

    def tail(self, r):
        r = np.asarray(r, dtype=float)
        if np.ndim(r) == 0 and r == 0:
            return self.base.total_mass
        return np.exp(r) * self.base.tail(r)

    @property
    def total_mass(self):
        return self.base.total_mass

    def describe(self):
        return {"kind": "prop1", "base": self.base.describe()}


# ---------------------------------------------------------------------------
# exponents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubordinatorExponent:
    """Laplace exponent of a (possibly killed) subordinator."""

    b: float = 0.0
    q: float = 0.0
    density: Optional[LevyDensity] = None
    closed_form: Optional[Callable[[float], float]] = field(default=None, compare=False, repr=False)
    name: str = "subordinator"

    def __post_init__(self):
        if not (self.b >= 0):
            raise ValueError(f"drift must satisfy b >= 0, got {self.b!r}")
        if not (self.q >= 0):
            raise ValueError(f"killing rate must satisfy q >= 0, got {self.q!r}")

    def value(self, u):
        if self.closed_form is not None:
            return float(self.closed_form(u))
        return eval_phi(self, u)

    @cached_property
    def small_jump_drift_cache(self):
        return {}

    def small_jump_drift(self, eps):
        """``int_0^eps r f(r) dr``: drift that replaces jumps below `eps`."""
        cache = self.small_jump_drift_cache
        if eps not in cache:
            f = self.density
            cache[eps] = 0.0 if f is None or eps <= 0 else _quad.integrate_interval(
                lambda r: r * f(r), 0.0, eps, what="small-jump drift", breaks=f.breakpoints
            )
        return cache[eps]

    def describe(self):
        d = {"type": "subordinator", "name": self.name, "b": self.b, "q": self.q}
        if self.density is not None:
            d["density"] = {"family": self.density.name, **self.density.params()}
        return d


@dataclass(frozen=True)
class SNExponent:
    """Laplace exponent of a spectrally negative Lévy process.

    The Gaussian part has variance ``2*sigma`` per unit time, matching the
    ``sigma*u**2`` term.
    """

    sigma: float = 0.0
    m: float = 0.0
    jumps: Optional[SNJumpMeasure] = None
    analytic_at_minus_one: bool = False
    psi_minus_one: Optional[float] = None
    closed_form: Optional[Callable[[float], float]] = field(default=None, compare=False, repr=False)
    name: str = "sn"

    def __post_init__(self):
        if not (self.sigma >= 0):
            raise ValueError(f"Gaussian coefficient must satisfy sigma >= 0, got {self.sigma!r}")
        if not np.isfinite(self.m):
            raise ValueError("mean must be finite")

    def value(self, u):
        if self.closed_form is not None:
            return float(self.closed_form(u))
        return eval_psi(self, u)

    def at_minus_one(self):
        """``psi(-1)``; requires analyticity at -1."""
        if not self.analytic_at_minus_one:
            raise ValueError(f"{self.name}: psi is not analytic at -1")
        if self.psi_minus_one is not None:
            return self.psi_minus_one
        return self.value(-1.0)

    @cached_property
    def _cache(self):
        return {}

    def _cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def small_jump_variance(self, eps):
        """``int_{-eps}^0 r^2 Pi(dr)``."""
        if self.jumps is None or eps <= 0:
            return 0.0
        J = self.jumps

        def compute():
            v = _quad.integrate_interval(
                lambda t: t * t * J.density(-t), 0.0, eps, "small-jump variance", J.breakpoints
            )
            return v + sum(r * r * w for r, w in J.atoms if -eps <= r < 0)

        return self._cached(("s2", eps), compute)

    def big_jump_mean(self, eps):
        """``int_{-inf}^{-eps} |r| Pi(dr)``."""
        if self.jumps is None:
            return 0.0
        J = self.jumps

        def compute():
            g = lambda t: t * J.density(-t)
            if eps > 0:
                v = _quad.integrate_tail(g, eps, "big-jump mean", J.breakpoints)
            else:
                v = _quad.integrate_half_line(g, what="jump mean", breaks=J.breakpoints)
            return v + sum(-r * w for r, w in J.atoms if r < -eps)

        return self._cached(("mu", eps), compute)

    def big_jump_rate(self, eps):
        """``Pi(-inf, -eps)``."""
        if self.jumps is None:
            return 0.0
        return self._cached(("rate", eps), lambda: float(self.jumps.tail(-eps)))

    def describe(self):
        d = {
            "type": "sn",
            "name": self.name,
            "sigma": self.sigma,
            "m": self.m,
            "analytic_at_minus_one": self.analytic_at_minus_one,
        }
        if self.psi_minus_one is not None:
            d["psi_minus_one"] = self.psi_minus_one
        if self.jumps is not None:
            d["jumps"] = self.jumps.describe()
        return d


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def eval_phi(exponent, u):
    """Evaluate ``phi(u)`` by quadrature of the Lévy–Khintchine integral."""
    if np.ndim(u):
        return np.array([eval_phi(exponent, float(v)) for v in np.ravel(u)]).reshape(np.shape(u))
    u = float(u)
    if not u >= 0:
        raise ValueError("eval_phi requires u >= 0")
    val = exponent.b * u + exponent.q
    f = exponent.density
    if f is None or u == 0:
        return val
    return val + _quad.integrate_half_line(
        lambda r: one_minus_exp(u * r) * f(r), what=f"phi({u})", breaks=f.breakpoints
    )


def _psi_integrand(x, d):
    """``(e^x - 1 - x) d`` without overflow when ``x`` is large and ``d`` tiny."""
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = exp_m1_mx(x) * d
        if np.all(np.isfinite(v)):
            return v
        alt = np.where(d > 0, np.exp(x + np.log(np.where(d > 0, d, 1.0))) - (1 + x) * d, 0.0)
    return np.where(np.isfinite(v), v, alt)


def eval_psi(exponent, u):
    """Evaluate ``psi(u)`` by quadrature of the Lévy–Khintchine integral.

    Negative arguments in ``(-1, 0)`` (and ``-1`` itself) are accepted only
    when the exponent is flagged analytic at -1.
    """
    if np.ndim(u):
        return np.array([eval_psi(exponent, float(v)) for v in np.ravel(u)]).reshape(np.shape(u))
    u = float(u)
    if u < 0 and not (exponent.analytic_at_minus_one and u >= -1):
        raise ValueError(f"psi({u}) is outside the domain of {exponent.name}")
    if u == 0:
        return 0.0
    val = exponent.sigma * u * u + exponent.m * u
    J = exponent.jumps
    if J is None:
        return val
    val += _quad.integrate_half_line(
        lambda t: _psi_integrand(-u * t, J.density(-t)), what=f"psi({u})", breaks=J.breakpoints
    )
    for r, w in J.atoms:
        val += w * exp_m1_mx(u * r)
    return val


def eval_psi_by_tail(exponent, u):
    """``psi(u)`` through the tail form ``u * int (1 - exp(u r)) Pi(-inf, r) dr``.

    An independent route used to cross-check :func:`eval_psi`; only for
    ``u >= 0``.
    """
    u = float(u)
    if u < 0:
        raise ValueError("eval_psi_by_tail requires u >= 0")
    val = exponent.sigma * u * u + exponent.m * u
    J = exponent.jumps
    if J is None or u == 0:
        return val
    return val + u * _quad.integrate_half_line(
        lambda t: one_minus_exp(u * t) * J.tail(-t), what=f"psi({u}) by tail", breaks=J.breakpoints
    )


def levy_tail_quad(density, r):
    """``int_r^inf f(s) ds`` by quadrature."""
    r = float(r)
    if r < 0:
        raise ValueError("levy_tail requires r >= 0")
    if r == 0:
        return _quad.integrate_half_line(density, what="total mass", breaks=density.breakpoints)
    return _quad.integrate_tail(density, r, what=f"tail({r})", breaks=density.breakpoints)


def levy_tail(density, r):
    """``int_r^inf f(s) ds``, closed form when the family has one."""
    r = float(r)
    if r < 0:
        raise ValueError("levy_tail requires r >= 0")
    if r == 0:
        return density.total_mass
    return float(density.tail(r))


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _validate_density(f, grid=VALIDATION_GRID):
    out = []
    vals = np.asarray(f(grid), dtype=float)
    if np.any(np.isnan(vals)) or np.any(vals < 0):
        out.append("density: f(r) >= 0 violated on validation grid")
    finite = np.isfinite(vals)
    v = vals[finite]
    if np.any(np.diff(v) > 1e-12 * np.maximum(np.abs(v[:-1]), 1e-300)):
        i = int(np.argmax(np.diff(v) > 1e-12 * np.maximum(np.abs(v[:-1]), 1e-300)))
        out.append(f"density: not monotone decreasing near r={grid[finite][i]:.4g}")
    for x, d in getattr(f, "jumps", ()):
        if d < 0:
            out.append(f"density: upward jump at r={x:.4g}")
    try:
        near = _quad.integrate_interval(lambda r: r * f(r), 0.0, 1.0, "int_0^1 r f", f.breakpoints)
        far = levy_tail(f, 1.0)
        if not (np.isfinite(near) and np.isfinite(far)) or _diverges(lambda r: r * f(r), -1) or _diverges(f, 1):
            raise EvaluationError("non-finite")
    except (EvaluationError, FloatingPointError, ValueError):
        out.append("density: int min(1, r) f(r) dr is not finite")
    return out


def _diverges(g, side):
    """Divergence test at 0 (side -1) or infinity (side 1) by nested cutoffs.

    Quadrature on a truncated range always returns a finite number, so the
    pieces over ``[e^-100, e^-50]`` and ``[e^-200, e^-100]`` are compared (or
    their mirror images ``[e^25, e^50]``, ``[e^50, e^100]``): for an
    integrable power law the second piece is the smaller one.
    """
    if side < 0:
        a = _quad.integrate_interval(g, math.exp(-100), math.exp(-50))
        b = _quad.integrate_interval(g, math.exp(-200), math.exp(-100))
    else:
        a = _quad.integrate_interval(g, math.exp(25), math.exp(50))
        b = _quad.integrate_interval(g, math.exp(50), math.exp(100))
    return b > a and b > 1e-12


def _fd_checks(fn, lo=0.0, hi=20.0, n=81):
    u = np.linspace(lo, hi, n)
    vals = np.array([fn(x) for x in u])
    return u, vals, np.diff(vals), np.diff(vals, 2)


def validate(exponent):
    """Check the type invariants of an exponent.

    Returns a list of human-readable violations; an empty list means valid.
    """
    out = []
    if isinstance(exponent, SubordinatorExponent):
        if exponent.b < 0:
            out.append("b >= 0 violated")
        if exponent.q < 0:
            out.append("q >= 0 violated")
        if exponent.density is not None:
            out.extend(_validate_density(exponent.density))
        if out:
            return out
        try:
            phi0 = eval_phi(exponent, 0.0)
            if abs(phi0 - exponent.q) > 1e-10:
                out.append(f"phi(0) = q violated ({phi0!r} vs {exponent.q!r})")
            _, _, d1, d2 = _fd_checks(lambda x: eval_phi(exponent, x))
            if np.any(d1 < -1e-8):
                out.append("phi non-decreasing on [0, 20] violated")
            if np.any(d2 > 1e-8):
                out.append("phi concave on [0, 20] violated")
        except EvaluationError as exc:
            out.append(f"phi evaluation failed: {exc}")
        return out

    if isinstance(exponent, SNExponent):
        if exponent.sigma < 0:
            out.append("sigma >= 0 violated")
        J = exponent.jumps
        if J is not None:
            try:
                g = lambda t: min(t, t * t) * J.density(-t)
                v = _quad.integrate_half_line(
                    np.vectorize(g), what="int min(|r|, r^2) Pi(dr)", breaks=J.breakpoints
                )
                if not np.isfinite(v):
                    raise EvaluationError("non-finite")
            except EvaluationError:
                out.append("jump measure: int min(|r|, r^2) Pi(dr) is not finite")
            dens = J.density(-VALIDATION_GRID)
            if np.any(np.isnan(dens)) or np.any(dens < 0):
                out.append("jump measure: negative density")
            if any(w < 0 for _, w in J.atoms):
                out.append("jump measure: negative atom")
        if out:
            return out
        try:
            if abs(eval_psi(exponent, 0.0)) > 1e-10:
                out.append("psi(0) = 0 violated")
            _, _, _, d2 = _fd_checks(lambda x: eval_psi(exponent, x))
            if np.any(d2 < -1e-8):
                out.append("psi convex on [0, 20] violated")
            h = 1e-5
            slope = (eval_psi(exponent, 2 * h) - eval_psi(exponent, h)) / h
            # forward difference at 0+: slope ~ m + psi''(0) * 1.5h
            curv = (eval_psi(exponent, 3 * h) - 2 * eval_psi(exponent, 2 * h) + eval_psi(exponent, h)) / h**2
            est = slope - 1.5 * h * curv
            if abs(est - exponent.m) > 1e-4 * max(1.0, abs(exponent.m)):
                out.append(f"psi'(0+) = m violated ({est!r} vs {exponent.m!r})")
        except EvaluationError as exc:
            out.append(f"psi evaluation failed: {exc}")
        return out

    raise TypeError(f"cannot validate {type(exponent).__name__}")
