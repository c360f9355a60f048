"""Path simulation for exponential functionals, Lamperti clocks and affine draws.

Two engines:

* an event-driven engine for processes that are linear between jumps
  (subordinators, and SN exponents with ``sigma = 0`` and finitely many
  jumps).  Segment integrals of ``exp(-xi)`` are exact.
* an Euler engine for the remaining SN exponents: Gaussian part plus
  small-jump Gaussian surrogate on a grid, big jumps as a compound Poisson
  process applied at step ends, trapezoid accumulation.

Both engines can run *coupled*: a fine and a coarse discretization driven by
the same random numbers, used to measure discretization sensitivity.
"""

import math

import numpy as np

from ..levy import SNExponent, SubordinatorExponent
from ._jumps import budget_cutoff, sn_jump_law, subordinator_jump_law
from .rng import PathConfig, SampleBatch, as_state, replicas

__all__ = [
    "sample_subordinator_expfun",
    "sample_sn_expfun",
    "sample_lamperti_path",
    "sample_entrance_law",
    "sample_affine_rhs",
    "sample_coupled",
    "euler_settings",
    "JUMP_BUDGET",
    "BLOCK",
]

# expected big jumps per Euler step; raises eps for infinite-activity measures
JUMP_BUDGET = 0.25
BLOCK = 32
# paths stop only when within this distance of their running maximum
GUARD_BAND = 1.0
# step-size warning: a single step carries more than this share of the integral
STEP_SHARE = 0.1
STEP_WARN_FRACTION = 0.01
# adaptive step multipliers once the remaining weight is negligible
STRETCH = ((1e-4, 256), (1e-3, 64), (1e-2, 16), (1e-1, 4))


def _cfg(cfg):
    return PathConfig() if cfg is None else cfg


# ---------------------------------------------------------------------------
# parameters of each simulation
# ---------------------------------------------------------------------------


class _SubordinatorSetup:
    def __init__(self, phi, eps):
        f = phi.density
        self.q = phi.q
        if f is None:
            self.eps, self.law, self.rate, self.slope = 0.0, None, 0.0, phi.b
        elif f.finite_activity:
            self.eps = 0.0
            self.law = subordinator_jump_law(f, 0.0)
            self.rate, self.slope = self.law.rate, phi.b
        else:
            self.eps = eps
            self.law = subordinator_jump_law(f, eps)
            self.rate = self.law.rate
            self.slope = phi.b + phi.small_jump_drift(eps)
        m1 = phi.value(1.0)
        if not m1 > 0:
            raise ValueError("subordinator functional needs phi(1) > 0")
        if self.slope == 0 and self.rate == 0 and self.q == 0:
            raise ValueError("degenerate subordinator: the functional is infinite")
        self.tau = 1.0 / m1
        self.sign = 1.0
        self.guard = False


def _sn_tau(psi):
    if psi.analytic_at_minus_one:
        v = psi.at_minus_one()
        if v < 0:
            return -1.0 / v, False
    return 1.0 / psi.m, True


class _SNEventSetup:
    """SN exponent with sigma = 0 and finite activity: exact between jumps."""

    def __init__(self, psi):
        J = psi.jumps
        self.q = 0.0
        self.eps = 0.0
        if J is None:
            self.law, self.rate, self.slope = None, 0.0, psi.m
        else:
            self.law = sn_jump_law(J, 0.0)
            self.rate = self.law.rate
            self.slope = psi.m + psi.big_jump_mean(0.0)
        self.tau, self.guard = _sn_tau(psi)
        self.sign = -1.0


def _event_mode(psi):
    return psi.sigma == 0 and (psi.jumps is None or psi.jumps.finite_activity)


class _Level:
    """Increment parameters for one step length ``h``."""

    def __init__(self, psi, h, eps):
        J = psi.jumps
        if J is None:
            self.eps, self.law, self.rate = 0.0, None, 0.0
            self.drift, self.var = psi.m, 2 * psi.sigma
        elif J.finite_activity:
            self.eps = 0.0
            self.law = sn_jump_law(J, 0.0)
            self.rate = self.law.rate
            self.drift = psi.m + psi.big_jump_mean(0.0)
            self.var = 2 * psi.sigma
        else:
            self.eps = budget_cutoff(J, h, JUMP_BUDGET, eps)
            self.law = sn_jump_law(J, self.eps)
            self.rate = self.law.rate
            self.drift = psi.m + psi.big_jump_mean(self.eps)
            self.var = 2 * psi.sigma + psi.small_jump_variance(self.eps)

    def jumps(self, gen, h, K):
        """Compound Poisson jumps over `K` steps of length `h` (per row)."""
        counts = gen.poisson(self.rate * h * K)
        tot = int(counts.sum())
        rows = np.repeat(np.arange(h.size), counts)
        cols = gen.integers(0, K, tot)
        return rows, cols, self.law.sample(gen, tot)


def _scatter(na, K, rows, cols, sizes):
    return np.bincount(rows * K + cols, weights=sizes, minlength=na * K).reshape(na, K)


class _EulerSetup:
    """Gaussian + compound-Poisson increments of an SN process on a grid.

    Each step length ``M * dt`` has its own cutoff: the smallest ``eps``
    (not below the requested one) keeping the expected number of big jumps
    per step under ``JUMP_BUDGET``.
    """

    def __init__(self, psi, dt, eps):
        self.psi, self.dt, self.eps_req = psi, dt, eps
        self._levels = {}
        base = self.level(1)
        self.eps, self.rate, self.drift, self.var = base.eps, base.rate, base.drift, base.var
        self.tau, self.guard = _sn_tau(psi)

    def level(self, M):
        if M not in self._levels:
            self._levels[M] = _Level(self.psi, self.dt * M, self.eps_req)
        return self._levels[M]

    def describe(self):
        return {"dt": self.dt, "eps_effective": self.eps, "jump_rate": self.rate,
                "drift": self.drift, "gaussian_variance_rate": self.var}

    def block(self, gen, h, K):
        na = h.size
        mult = np.rint(h / self.dt).astype(np.int64)
        inc = np.empty((na, K))
        for M in np.unique(mult):
            sel = np.flatnonzero(mult == M)
            lv, hs = self.level(int(M)), h[sel]
            if lv.var > 0:
                part = gen.standard_normal((sel.size, K))
                part *= np.sqrt(lv.var * hs)[:, None]
                part += (lv.drift * hs)[:, None]
            else:
                part = np.empty((sel.size, K))
                part[:] = (lv.drift * hs)[:, None]
            if lv.rate > 0:
                part -= _scatter(sel.size, K, *lv.jumps(gen, hs, K))
            inc[sel] = part
        return inc


class _CoupledEuler:
    """Fine (dt/2) and coarse (dt) increments from shared randomness.

    Two fine Gaussian increments sum to the coarse one; the coarse run adds
    independent Gaussian variance for jumps between the two cutoffs, and
    keeps only the fine jumps above its own cutoff.
    """

    def __init__(self, coarse, fine):
        if fine.eps > coarse.eps:
            raise ValueError("fine cutoff must not exceed the coarse cutoff")
        self.coarse, self.fine = coarse, fine

    def block(self, gen, h, K):
        na = h.size
        mult = np.rint(h / self.coarse.dt).astype(np.int64)
        inc_f = np.empty((na, 2 * K))
        inc_c = np.empty((na, K))
        for M in np.unique(mult):
            sel = np.flatnonzero(mult == M)
            c, f = self.coarse.level(int(M)), self.fine.level(int(M))
            hs = h[sel]
            hf = 0.5 * hs
            if f.var > 0:
                g = gen.standard_normal((sel.size, 2 * K)) * np.sqrt(f.var * hf)[:, None]
            else:
                g = np.zeros((sel.size, 2 * K))
            pf = g + (f.drift * hf)[:, None]
            pc = g[:, 0::2] + g[:, 1::2] + (c.drift * hs)[:, None]
            extra = max(0.0, c.var - f.var)
            if extra > 0:
                pc += np.sqrt(extra * hs)[:, None] * gen.standard_normal((sel.size, K))
            if f.rate > 0:
                rows, cols, sizes = f.jumps(gen, hf, 2 * K)
                pf -= _scatter(sel.size, 2 * K, rows, cols, sizes)
                big = sizes > c.eps
                pc -= _scatter(sel.size, K, rows[big], cols[big] // 2, sizes[big])
            inc_f[sel], inc_c[sel] = pf, pc
        return inc_f, inc_c


# ---------------------------------------------------------------------------
# event-driven engine
# ---------------------------------------------------------------------------


def _event_run(gen, n, setup, cfg, coupled_setup=None):
    """Exponential functionals for processes linear between jumps.

    Returns a list of ``(values, truncated)`` per track: one track, or two
    (fine, coarse) when `coupled_setup` (the coarse parameters) is given.
    Jumps are drawn from `setup`; the coarse track keeps only those above
    its own cutoff.
    """
    tracks = [setup] if coupled_setup is None else [setup, coupled_setup]
    T = len(tracks)
    xi = np.zeros((T, n))
    runmax = np.zeros((T, n))
    I = np.zeros((T, n))
    done = np.zeros((T, n), dtype=bool)
    trunc = np.zeros((T, n), dtype=bool)
    t = np.zeros(n)
    kill = gen.exponential(1.0 / setup.q, n) if setup.q > 0 else np.full(n, np.inf)
    slopes = np.array([s.slope for s in tracks])[:, None]
    active = np.arange(n)
    while active.size:
        na = active.size
        wait = gen.exponential(1.0 / setup.rate, na) if setup.rate > 0 else np.full(na, np.inf)
        left_kill = kill[active] - t[active]
        left_cap = cfg.max_time - t[active]
        # no further events: the rest of the path is a straight line
        no_event = ~np.isfinite(np.minimum(wait, left_kill))
        h = np.where(no_event, np.inf, np.minimum(np.minimum(wait, left_kill), left_cap))
        killed = left_kill <= np.minimum(wait, left_cap)
        capped = ~killed & ~no_event & (left_cap <= wait)
        e0 = np.exp(-xi[:, active])
        with np.errstate(invalid="ignore", over="ignore"):
            seg = np.where(
                slopes > 0,
                e0 * -np.expm1(-slopes * h) / np.where(slopes > 0, slopes, 1.0),
                e0 * h,
            )
        live = ~done[:, active]
        I[:, active] += np.where(live, seg, 0.0)
        with np.errstate(invalid="ignore"):
            xi[:, active] += np.where(live & np.isfinite(h), slopes * h, 0.0)
        t[active] += h
        finished = killed | capped | ~np.isfinite(h)
        jumped = ~finished
        k = int(jumped.sum())
        if k:
            sizes = setup.law.sample(gen, k)
            cols = active[jumped]
            for i, s in enumerate(tracks):
                dx = np.where(sizes > s.eps, sizes, 0.0) if i else sizes
                xi[i, cols] += setup.sign * dx
        for i, s in enumerate(tracks):
            row_live = ~done[i, active]
            runmax[i, active] = np.maximum(runmax[i, active], xi[i, active])
            stop = np.exp(-xi[i, active]) * s.tau <= cfg.tail_tol * I[i, active]
            if s.guard:
                stop &= xi[i, active] >= runmax[i, active] - GUARD_BAND
            newly = row_live & (finished | stop)
            trunc[i, active[row_live & capped]] = True
            done[i, active[newly]] = True
        active = active[~np.all(done[:, active], axis=0)]
    return [(I[i], trunc[i]) for i in range(T)]


# ---------------------------------------------------------------------------
# Euler engine
# ---------------------------------------------------------------------------


class _ExpfunAcc:
    """Trapezoid accumulation of ``int exp(-Xi)`` with adaptive stretching."""

    stretches = True

    def __init__(self, n, setup, cfg):
        self.Xi = np.zeros(n)
        self.I = np.zeros(n)
        self.runmax = np.zeros(n)
        self.t = np.zeros(n)
        self.maxstep = np.zeros(n)
        self.done = np.zeros(n, dtype=bool)
        self.trunc = np.zeros(n, dtype=bool)
        self.tau, self.guard, self.cfg = setup.tau, setup.guard, cfg

    def multiplier(self, rows):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            w = np.exp(-self.Xi[rows]) * self.tau / self.I[rows]
        mult = np.ones(rows.size)
        for level, m in STRETCH[::-1]:
            mult = np.where(w <= level, np.maximum(mult, m), mult)
        # guard against stretching during a downward excursion
        mult = np.where(self.Xi[rows] < self.runmax[rows] - GUARD_BAND, 1.0, mult)
        return np.where(self.done[rows], np.inf, mult)

    def step(self, rows, inc, h):
        live = ~self.done[rows]
        r, inc, h = rows[live], inc[live], h[live]
        if r.size == 0:
            return
        Xi0 = self.Xi[r]
        path = np.cumsum(inc, axis=1, out=inc)
        path += Xi0[:, None]
        self.runmax[r] = np.maximum(self.runmax[r], path.max(axis=1))
        self.Xi[r] = path[:, -1]
        with np.errstate(over="ignore"):
            E = np.exp(np.negative(path, out=path), out=path)
            E0 = np.exp(-Xi0)
        # trapezoid sum; a step contributes at most h * max(endpoint values)
        self.I[r] += h * (E.sum(axis=1) - 0.5 * E[:, -1] + 0.5 * E0)
        self.maxstep[r] = np.maximum(self.maxstep[r], h * np.maximum(E.max(axis=1), E0))
        self.t[r] += h * inc.shape[1]
        stop = E[:, -1] * self.tau <= self.cfg.tail_tol * self.I[r]
        if self.guard:
            stop &= self.Xi[r] >= self.runmax[r] - GUARD_BAND
        capped = self.t[r] >= self.cfg.max_time
        bad = ~np.isfinite(self.I[r])
        self.trunc[r[capped | bad]] = True
        self.done[r[stop | capped | bad]] = True

    def result(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            share = self.maxstep / self.I
        return self.I, self.trunc, share > STEP_SHARE


class _LampertiAcc:
    """Runs the clock ``int exp(Xi)`` up to `target`; returns ``x exp(Xi)`` there."""

    stretches = False

    def __init__(self, n, setup, cfg, x, target):
        self.Xi = np.zeros(n)
        self.C = np.zeros(n)
        self.t = np.zeros(n)
        self.val = np.zeros(n)
        self.maxstep = np.zeros(n)
        self.done = np.zeros(n, dtype=bool)
        self.trunc = np.zeros(n, dtype=bool)
        self.cfg, self.x, self.target = cfg, x, target

    def multiplier(self, rows):
        return np.where(self.done[rows], np.inf, 1.0)

    def step(self, rows, inc, h):
        live = ~self.done[rows]
        r, inc, h = rows[live], inc[live], h[live]
        if r.size == 0:
            return
        Xi0 = self.Xi[r]
        path = Xi0[:, None] + np.cumsum(inc, axis=1)
        prev = np.concatenate([Xi0[:, None], path[:, :-1]], axis=1)
        contrib = 0.5 * h[:, None] * (np.exp(prev) + np.exp(path))
        cum = self.C[r][:, None] + np.cumsum(contrib, axis=1)
        hit = cum >= self.target
        any_hit = hit.any(axis=1)
        j = np.argmax(hit, axis=1)
        idx = np.arange(r.size)
        before = cum[idx, j] - contrib[idx, j]
        theta = np.clip((self.target - before) / contrib[idx, j], 0.0, 1.0)
        xs = prev[idx, j] + theta * (path[idx, j] - prev[idx, j])
        self.maxstep[r] = np.maximum(self.maxstep[r], np.where(any_hit, contrib[idx, j], contrib.max(axis=1)))
        self.C[r] = cum[:, -1]
        self.Xi[r] = path[:, -1]
        self.t[r] += h * inc.shape[1]
        self.val[r[any_hit]] = self.x * np.exp(xs[any_hit])
        capped = ~any_hit & (self.t[r] >= self.cfg.max_time)
        self.val[r[capped]] = self.x * np.exp(self.Xi[r[capped]])
        self.trunc[r[capped]] = True
        self.done[r[any_hit | capped]] = True

    def result(self):
        return self.val, self.trunc, self.maxstep / self.target > STEP_SHARE


class _AffineAcc:
    """``int_0^T exp(-Xi)`` up to the first grid point with ``Xi >= y``."""

    stretches = False

    def __init__(self, n, setup, cfg, y):
        self.Xi = np.zeros(n)
        self.I = np.zeros(n)
        self.level = np.zeros(n)
        self.t = np.zeros(n)
        self.maxstep = np.zeros(n)
        self.done = np.zeros(n, dtype=bool)
        self.trunc = np.zeros(n, dtype=bool)
        self.cfg, self.y = cfg, y

    def multiplier(self, rows):
        return np.where(self.done[rows], np.inf, 1.0)

    def step(self, rows, inc, h):
        live = ~self.done[rows]
        r, inc, h = rows[live], inc[live], h[live]
        if r.size == 0:
            return
        Xi0 = self.Xi[r]
        path = Xi0[:, None] + np.cumsum(inc, axis=1)
        prev = np.concatenate([Xi0[:, None], path[:, :-1]], axis=1)
        with np.errstate(over="ignore"):
            contrib = 0.5 * h[:, None] * (np.exp(-prev) + np.exp(-path))
        hit = path >= self.y
        any_hit = hit.any(axis=1)
        K = inc.shape[1]
        j = np.where(any_hit, np.argmax(hit, axis=1), K - 1)
        upto = np.arange(K)[None, :] <= j[:, None]
        self.I[r] += np.where(upto, contrib, 0.0).sum(axis=1)
        self.maxstep[r] = np.maximum(self.maxstep[r], np.where(upto, contrib, 0.0).max(axis=1))
        idx = np.arange(r.size)
        self.Xi[r] = path[idx, j]
        self.t[r] += h * (j + 1)
        self.level[r[any_hit]] = path[idx, j][any_hit]
        capped = ~any_hit & (self.t[r] >= self.cfg.max_time)
        self.level[r[capped]] = self.Xi[r[capped]]
        self.trunc[r[capped]] = True
        self.done[r[any_hit | capped]] = True

    def result(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            share = self.maxstep / self.I
        return (self.I, self.level), self.trunc, share > STEP_SHARE


def _euler_run(gen, n, stepper, accs, cfg, coupled):
    """Drive one or two accumulators with Euler increments for `n` paths."""
    active = np.arange(n)
    dt = cfg.dt
    while active.size:
        mult = np.min([a.multiplier(active) for a in accs], axis=0)
        h = dt * mult
        if coupled:
            inc_f, inc_c = stepper.block(gen, h, BLOCK)
            accs[0].step(active, inc_f, h / 2)
            accs[1].step(active, inc_c, h)
        else:
            accs[0].step(active, stepper.block(gen, h, BLOCK), h)
        alive = np.zeros(active.size, dtype=bool)
        for a in accs:
            alive |= ~a.done[active]
        active = active[alive]


def euler_settings(psi, cfg=None):
    """Effective Euler parameters (cutoff, rates, variances) for `psi`."""
    cfg = _cfg(cfg)
    if _event_mode(psi):
        return {"mode": "event"}
    return {"mode": "euler", **_EulerSetup(psi, cfg.dt, cfg.eps).describe()}


# ---------------------------------------------------------------------------
# public samplers
# ---------------------------------------------------------------------------


def _meta(kind, exponent, cfg, rng, n, **extra):
    return {
        "functional": kind,
        "exponent": exponent.describe(),
        "config": cfg.as_dict(),
        "seed": int(rng.seed),
        "stream": list(rng.key),
        "n": int(n),
        **extra,
    }


def _finish(values, trunc, warn, meta, extra_diag=None):
    diag = {"truncated_fraction": float(np.mean(trunc)) if trunc.size else 0.0}
    if warn is not None:
        frac = float(np.mean(warn)) if warn.size else 0.0
        diag["step_warning_fraction"] = frac
        diag["step_warning"] = frac > STEP_WARN_FRACTION
    if extra_diag:
        diag.update(extra_diag)
    return SampleBatch(values, meta, diag)


def _check_n(n):
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError(f"sample size must be a positive integer, got {n!r}")


def _sub_expfun(phi, cfg, rng, n, coupled):
    fine_eps = cfg.eps / 2 if coupled else cfg.eps
    setup = _SubordinatorSetup(phi, fine_eps)
    coarse = _SubordinatorSetup(phi, cfg.eps) if coupled else None
    outs = [[] for _ in range(2 if coupled else 1)]
    for rep, c in replicas(n):
        res = _event_run(rng.generator(rep), c, setup, cfg, coarse)
        for o, r in zip(outs, res):
            o.append(r)
    return [(np.concatenate([v for v, _ in o]), np.concatenate([t for _, t in o])) for o in outs], setup


def sample_subordinator_expfun(phi, cfg=None, rng=None, n=1):
    """Draws of ``I_phi = int_0^inf exp(-xi_s) ds`` (killed at ``e_q``).

    Jumps above ``cfg.eps`` are simulated as a compound Poisson process with
    sizes from the inverse tail; smaller jumps become the drift
    ``int_0^eps r f(r) dr``.  Finite-activity densities keep every jump.
    Between jumps the path is linear, so each segment integral is exact.
    """
    if not isinstance(phi, SubordinatorExponent):
        raise TypeError("expected a SubordinatorExponent")
    cfg, rng = _cfg(cfg), as_state(rng)
    _check_n(n)
    [(vals, trunc)], setup = _sub_expfun(phi, cfg, rng, n, False)
    meta = _meta("subordinator-expfun", phi, cfg, rng, n, eps_effective=setup.eps, engine="event")
    return _finish(vals, trunc, None, meta)


def _sn_expfun(psi, cfg, rng, n, coupled):
    if not psi.m > 0:
        raise ValueError(f"SN functional needs a positive mean, got m={psi.m!r}")
    if _event_mode(psi):
        setup = _SNEventSetup(psi)
        outs = [[] for _ in range(2 if coupled else 1)]
        for rep, c in replicas(n):
            res = _event_run(rng.generator(rep), c, setup, cfg, setup if coupled else None)
            for o, r in zip(outs, res):
                o.append(r + (np.zeros(c, dtype=bool),))
        info = {"engine": "event"}
    else:
        coarse = _EulerSetup(psi, cfg.dt, cfg.eps)
        if coupled:
            fine = _EulerSetup(psi, cfg.dt / 2, cfg.eps / 2)
            stepper = _CoupledEuler(coarse, fine)
            setups = [fine, coarse]
        else:
            stepper, setups = coarse, [coarse]
        outs = [[] for _ in setups]
        for rep, c in replicas(n):
            accs = [_ExpfunAcc(c, s, cfg) for s in setups]
            _euler_run(rng.generator(rep), c, stepper, accs, cfg, coupled)
            for o, a in zip(outs, accs):
                o.append(a.result())
        info = {"engine": "euler", **coarse.describe()}
    res = [tuple(np.concatenate(parts) for parts in zip(*o)) for o in outs]
    return res, info


def sample_sn_expfun(psi, cfg=None, rng=None, n=1):
    """Draws of ``I_psi = int_0^inf exp(-Xi_s) ds`` for an SN exponent with ``m > 0``.

    Paths stop once ``exp(-Xi_t) * tau <= tail_tol * I_t`` where ``tau`` is
    ``-1/psi(-1)`` when that is available and negative, otherwise ``1/m``
    combined with a running-maximum guard.
    """
    if not isinstance(psi, SNExponent):
        raise TypeError("expected an SNExponent")
    cfg, rng = _cfg(cfg), as_state(rng)
    _check_n(n)
    [(vals, trunc, warn)], info = _sn_expfun(psi, cfg, rng, n, False)
    meta = _meta("sn-expfun", psi, cfg, rng, n, **info)
    return _finish(vals, trunc, warn if info["engine"] == "euler" else None, meta)


def _lamperti(psi, x, t, cfg, rng, n, coupled):
    if not (x > 0 and t > 0):
        raise ValueError("Lamperti paths need x > 0 and t > 0")
    coarse = _EulerSetup(psi, cfg.dt, cfg.eps)
    if coupled:
        fine = _EulerSetup(psi, cfg.dt / 2, cfg.eps / 2)
        stepper, setups = _CoupledEuler(coarse, fine), [fine, coarse]
    else:
        stepper, setups = coarse, [coarse]
    outs = [[] for _ in setups]
    for rep, c in replicas(n):
        accs = [_LampertiAcc(c, s, cfg, x, t / x) for s in setups]
        _euler_run(rng.generator(rep), c, stepper, accs, cfg, coupled)
        for o, a in zip(outs, accs):
            o.append(a.result())
    return [tuple(np.concatenate(parts) for parts in zip(*o)) for o in outs], coarse


def sample_lamperti_path(psi, x, t, cfg=None, rng=None, n=1):
    """Draws of ``X_t = x exp(Xi_{A(t/x)})`` where ``A`` inverts ``int exp(Xi)``.

    The clock is accumulated by the trapezoid rule on the Euler grid and
    interpolated linearly inside the crossing step.
    """
    cfg, rng = _cfg(cfg), as_state(rng)
    _check_n(n)
    [(vals, trunc, warn)], setup = _lamperti(psi, x, t, cfg, rng, n, False)
    meta = _meta("lamperti", psi, cfg, rng, n, x=x, t=t, engine="euler", **setup.describe())
    return _finish(vals, trunc, warn, meta)


def sample_entrance_law(psi, cfg=None, rng=None, n=1):
    """Approximate entrance-law draws: ``X_1`` started from ``cfg.x0``."""
    cfg, rng = _cfg(cfg), as_state(rng)
    if not psi.value(1.0) > 0:
        raise ValueError("entrance law needs psi(1) > 0")
    b = sample_lamperti_path(psi, cfg.x0, 1.0, cfg, rng, n)
    b.meta["functional"] = "entrance"
    return b


def _affine(psi, y, cfg, rng, n, coupled):
    if not psi.m > 0:
        raise ValueError(f"affine draws need a positive mean, got m={psi.m!r}")
    if not y > 0:
        raise ValueError("affine draws need y > 0")
    coarse = _EulerSetup(psi, cfg.dt, cfg.eps)
    if coupled:
        fine = _EulerSetup(psi, cfg.dt / 2, cfg.eps / 2)
        stepper, setups = _CoupledEuler(coarse, fine), [fine, coarse]
    else:
        stepper, setups = coarse, [coarse]
    first = rng.child("passage")
    outs = [[] for _ in setups]
    for rep, c in replicas(n):
        accs = [_AffineAcc(c, s, cfg, y) for s in setups]
        _euler_run(first.generator(rep), c, stepper, accs, cfg, coupled)
        for o, a in zip(outs, accs):
            o.append(a.result())
    parts = [tuple(np.concatenate(p) for p in zip(*[(r[0][0], r[0][1], r[1], r[2]) for r in o])) for o in outs]
    rest, _ = _sn_expfun(psi, cfg, rng.child("remainder"), n, coupled)
    res = []
    for (integral, level, trunc, warn), (I2, trunc2, _) in zip(parts, rest):
        res.append((integral + np.exp(-level) * I2, trunc | trunc2, warn))
    return res, coarse


def sample_affine_rhs(psi, y, cfg=None, rng=None, n=1):
    """Draws of ``int_0^{T_y} exp(-Xi_s) ds + exp(-Xi_{T_y}) I'``.

    ``T_y`` is the first grid time with ``Xi >= y`` and ``I'`` is an
    independent draw of ``I_psi``.  On the grid the level reached,
    ``Xi_{T_y}``, overshoots `y` by ``O(sqrt(dt))``; using it (rather than
    `y`) keeps the decomposition exact for the simulated path.
    """
    cfg, rng = _cfg(cfg), as_state(rng)
    _check_n(n)
    [(vals, trunc, warn)], setup = _affine(psi, y, cfg, rng, n, False)
    meta = _meta("affine", psi, cfg, rng, n, y=y, engine="euler", **setup.describe())
    return _finish(vals, trunc, warn, meta)


def sample_coupled(kind, exponent, cfg=None, rng=None, n=1, **kw):
    """Coarse ``(dt, eps)`` and fine ``(dt/2, eps/2)`` batches from shared randomness.

    `kind` is one of ``"subordinator"``, ``"sn"``, ``"entrance"``,
    ``"lamperti"`` (needs ``x`` and ``t``) or ``"affine"`` (needs ``y``).
    Returns ``(coarse, fine)`` SampleBatches.
    """
    cfg, rng = _cfg(cfg), as_state(rng)
    _check_n(n)
    if kind == "subordinator":
        (fine, coarse), _ = _sub_expfun(exponent, cfg, rng, n, True)
        fine, coarse = fine + (None,), coarse + (None,)
    elif kind == "sn":
        (fine, coarse), _ = _sn_expfun(exponent, cfg, rng, n, True)
    elif kind in ("entrance", "lamperti"):
        x = cfg.x0 if kind == "entrance" else kw["x"]
        t = 1.0 if kind == "entrance" else kw["t"]
        (fine, coarse), _ = _lamperti(exponent, x, t, cfg, rng, n, True)
    elif kind == "affine":
        (fine, coarse), _ = _affine(exponent, kw["y"], cfg, rng, n, True)
    else:
        raise ValueError(f"unknown coupled kind {kind!r}")
    out = []
    for label, (vals, trunc, warn), c in (("coarse", coarse, cfg), ("fine", fine, cfg.halved())):
        meta = _meta(kind, exponent, c, rng, n, coupled=label)
        out.append(_finish(vals, trunc, warn, meta))
    return tuple(out)
