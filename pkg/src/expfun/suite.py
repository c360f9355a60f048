"""The acceptance battery: every identity at its shipped size and seed."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import families
from . import verify as V
from .samplers import PathConfig
from .samplers.rng import DEFAULT_SEED
from .transforms import prop1_transform, theorem1_converse, theorem1_forward

__all__ = ["SuiteEntry", "SuiteResult", "suite_entries", "run_suite", "ROBUST_N"]

ROBUST_N = 20_000


@dataclass
class SuiteEntry:
    """One pipeline call plus, per sampled batch, how to rerun it coupled.

    `probes` maps ``(report_name, batch_key)`` to ``(kind, exponent, kwargs)``
    for :func:`expfun.verify.discretization_check`.
    """

    criterion: int
    run: object
    probes: dict = field(default_factory=dict)


def suite_entries(n=None):
    """Entries for criteria 5 to 9; `n` overrides every sample size."""
    N = lambda default: default if n is None else n
    ej = families.exponential_jump()
    st = families.stable_example(0.5)
    bm = families.brownian(1.0, 1.0)
    fej = theorem1_forward(ej)
    st_psi1 = theorem1_forward(st)
    st_psi2 = prop1_transform(st_psi1)
    entries = [
        SuiteEntry(5, lambda s, c: _named("nfe/exponential-jump", V.verify_nfe(ej, N(100_000), s, c)), {
            ("nfe/exponential-jump", "subordinator"): ("subordinator", ej, {}),
            ("nfe/exponential-jump", "sn"): ("sn", fej, {}),
        }),
        SuiteEntry(5, lambda s, c: _named("nfe/stable-example", V.verify_nfe(st, N(100_000), s, c)), {
            ("nfe/stable-example", "subordinator"): ("subordinator", st, {}),
            ("nfe/stable-example", "sn"): ("sn", st_psi1, {}),
        }),
        SuiteEntry(6, lambda s, c: _named("nfe2/brownian", V.verify_nfe2(bm, N(100_000), s, c)), {
            ("nfe2/brownian", "subordinator"): ("subordinator", theorem1_converse(bm), {}),
            ("nfe2/brownian", "sn"): ("sn", bm, {}),
        }),
        SuiteEntry(6, lambda s, c: _named("nfe2/forward-exponential-jump", V.verify_nfe2(fej, N(100_000), s, c)), {
            ("nfe2/forward-exponential-jump", "subordinator"): ("subordinator", theorem1_converse(fej), {}),
            ("nfe2/forward-exponential-jump", "sn"): ("sn", fej, {}),
        }),
        SuiteEntry(7, lambda s, c: _named("prop1/brownian", V.verify_prop1(bm, N(20_000), s, c)), {
            ("prop1/brownian", "entrance"): ("entrance", bm, {}),
            ("prop1/brownian", "sn"): ("sn", prop1_transform(bm), {}),
        }),
    ]
    for y in (1.0, 5.0):
        name = f"selfdecomp/brownian/y={y:g}"
        entries.append(SuiteEntry(
            8,
            (lambda name, y: lambda s, c: _named(name, V.verify_selfdecomp(bm, y, N(20_000), s, c)))(name, y),
            {(name, "sn"): ("sn", bm, {}), (name, "affine"): ("affine", bm, {"y": y})},
        ))
    entries.append(SuiteEntry(9, lambda s, c: V.verify_section3(0.5, N(100_000), s, c), {
        ("section3-i", "functional"): ("sn", st_psi1, {}),
        ("section3-ii", "functional"): ("sn", st_psi2, {}),
        ("section3-iii", "functional"): ("subordinator", theorem1_converse(st_psi2), {}),
        ("section3-v", "functional"): ("sn", theorem1_forward(families.dual_example(0.5)), {}),
    }))
    return entries


def _named(name, report):
    report.name = name
    return report


@dataclass
class SuiteResult:
    seed: int
    config: dict
    reports: list
    criteria: dict
    robustness: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.reports) and all(r.passed for r in self.robustness)

    def to_dict(self):
        return {
            "suite": "acceptance",
            "passed": self.passed,
            "seed": self.seed,
            "config": self.config,
            "criteria": self.criteria,
            "reports": [r.to_dict() for r in self.reports],
            "robustness": [r.to_dict() for r in self.robustness],
        }


def run_suite(seed=DEFAULT_SEED, cfg=None, n=None, robust=True, robust_n=ROBUST_N, progress=None):
    """Run the battery, then (optionally) the coupled discretization probes.

    Each probe compares a batch's first moment at ``(dt, eps)`` and
    ``(dt/2, eps/2)`` with `robust_n` coupled paths, against the standard
    error that the battery itself reported for that batch.
    """
    cfg = PathConfig() if cfg is None else cfg
    reports, criteria, probes = [], {}, {}
    for e in suite_entries(n):
        out = e.run(seed, cfg)
        out = out if isinstance(out, list) else [out]
        for r in out:
            if not r.name:
                r.name = r.identity
            reports.append(r)
            criteria.setdefault(str(e.criterion), []).append(r.name)
            if progress:
                progress(r)
        probes.update(e.probes)
    robustness = []
    if robust:
        by_name = {r.name: r for r in reports}
        for (name, key), (kind, exponent, kw) in probes.items():
            b = by_name[name].batches[key]
            rr = V.discretization_check(
                kind, exponent, b["order"], robust_n, seed, cfg, label=f"{name}:{key}", se=b["se"], **kw
            )
            robustness.append(rr)
            if progress:
                progress(rr)
    return SuiteResult(int(seed), cfg.as_dict(), reports, criteria, robustness)
