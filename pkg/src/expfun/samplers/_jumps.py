"""Jump-size laws above a cutoff, sampled by inverting the Lévy tail."""

import math

import numpy as np

from ..levy import ExponentialSNJumps, LevyDensity

TABLE_POINTS = 1200
LOOKUP_POINTS = 8192
# finite-activity tables start here; smaller jumps are returned as this size
TABLE_FLOOR = 1e-12
TAIL_FLOOR = 1e-14


class JumpLaw:
    """Magnitudes ``x > eps`` with tail ``T(x)`` (rate of jumps of size >= x).

    Atoms are given as ``(magnitude, weight)``.  The continuous part is
    inverted with `inverse` when available, otherwise through a log-log
    interpolation table of ``T``.
    """

    def __init__(self, tail, eps, atoms=(), inverse=None, total=None):
        self.eps = float(eps)
        self.atoms = tuple((float(x), float(w)) for x, w in atoms if x > eps and w > 0)
        atom_mass = sum(w for _, w in self.atoms)
        self._tail = tail
        if eps > 0:
            t0 = float(tail(eps))
        else:
            t0 = float(total)
        self.rate = t0
        self.cont_rate = max(0.0, t0 - atom_mass)
        self._inverse = inverse
        if inverse is None and self.cont_rate > 0:
            self._build_table()

    def _cont_tail(self, x):
        x = np.asarray(x, dtype=float)
        t = np.asarray(self._tail(x), dtype=float)
        for a, w in self.atoms:
            t = t - np.where(a >= x, w, 0.0)
        return t

    def _build_table(self):
        lo = self.eps if self.eps > 0 else TABLE_FLOOR
        hi = max(1.0, 2 * lo)
        while self._cont_tail(hi) > TAIL_FLOOR * self.cont_rate and hi < 1e6:
            hi *= 2
        x = np.geomspace(lo, hi, TABLE_POINTS)
        t = self._cont_tail(x)
        if self.eps == 0:
            t[0] = self.cont_rate
        keep = t > 0
        x, t = x[keep], t[keep]
        lt = np.log(t)
        # interpolation needs strictly increasing abscissae
        lt_rev, lx_rev = lt[::-1], np.log(x)[::-1]
        lt_u, idx = np.unique(lt_rev, return_index=True)
        # resample on a uniform log-tail grid so lookups need no search
        self._y0 = lt_u[0]
        self._dy = (lt_u[-1] - lt_u[0]) / (LOOKUP_POINTS - 1)
        self._lx = np.interp(self._y0 + self._dy * np.arange(LOOKUP_POINTS), lt_u, lx_rev[idx])

    def _invert(self, t):
        if self._inverse is not None:
            return self._inverse(t)
        pos = np.clip((np.log(t) - self._y0) / self._dy, 0.0, LOOKUP_POINTS - 1.000001)
        i = pos.astype(np.intp)
        frac = pos - i
        return np.exp(self._lx[i] + frac * (self._lx[i + 1] - self._lx[i]))

    def sample(self, gen, k):
        """`k` jump magnitudes; consumes exactly ``k`` (or ``2k`` with atoms) uniforms."""
        if k == 0:
            return np.empty(0)
        u = 1.0 - gen.random(k)  # (0, 1]
        if not self.atoms:
            return self._invert(u * self.cont_rate)
        c = gen.random(k) * self.rate
        out = self._invert(u * self.cont_rate)
        edges = self.cont_rate + np.cumsum([w for _, w in self.atoms])
        which = np.searchsorted(edges, c, side="right")
        for i, (a, _) in enumerate(self.atoms):
            out = np.where((c >= self.cont_rate) & (which == i), a, out)
        return out


def subordinator_jump_law(density, eps):
    """Jumps above `eps` of a subordinator with Lévy density `density`."""
    inverse = None
    if type(density).inverse_tail is not LevyDensity.inverse_tail:
        inverse = density.inverse_tail
    if eps > 0:
        return JumpLaw(density.tail, eps, inverse=inverse)
    return JumpLaw(density.tail, 0.0, inverse=inverse, total=density.total_mass)


def sn_jump_law(jumps, eps):
    """Jump magnitudes above `eps` of an SN jump measure."""
    tail = lambda x: jumps.tail(-np.asarray(x, dtype=float))
    atoms = [(-r, w) for r, w in jumps.atoms]
    inverse = None
    if isinstance(jumps, ExponentialSNJumps):
        lam, rho = jumps.lam, jumps.rho
        inverse = lambda t: -np.log(np.asarray(t) / lam) / rho
    if eps > 0:
        return JumpLaw(tail, eps, atoms=atoms, inverse=inverse)
    return JumpLaw(tail, 0.0, atoms=atoms, inverse=inverse, total=jumps.total_mass)


def budget_cutoff(jumps, dt, budget, eps_min):
    """Smallest cutoff ``>= eps_min`` with ``rate(eps) * dt <= budget``."""
    rate = lambda e: float(jumps.tail(-e))
    if rate(eps_min) * dt <= budget:
        return eps_min
    lo, hi = math.log(eps_min), math.log(max(1.0, eps_min))
    while rate(math.exp(hi)) * dt > budget:
        hi += 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if rate(math.exp(mid)) * dt > budget:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)
