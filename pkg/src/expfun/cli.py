"""Command-line entry point: ``expfun <command> [options]``.

Every command writes ``report.json`` plus CSV side files into ``--out``.
Exit status: 0 when every pass flag is true, 1 on a statistical failure,
2 on a configuration or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import moments as mom
from . import suite as suite_mod
from . import verify as V
from .config import IDENTITIES, TRANSFORMS, ConfigError, Plan, parse_config
from .levy import SNExponent, SubordinatorExponent, eval_phi, eval_psi
from .samplers import (
    sample_affine_rhs,
    sample_entrance_law,
    sample_sn_expfun,
    sample_subordinator_expfun,
)
from .samplers.rng import RngState
from .transforms import CROSS_CHECK_GRID, CROSS_CHECK_RTOL, BernsteinDual, cross_check
from . import families

__all__ = ["main", "run", "build_parser", "histogram", "write_csv"]

log = logging.getLogger("expfun")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
HIST_BINS = 100
HIST_QUANTILE = 0.995
DEFAULT_GRID = [float(u) for u in CROSS_CHECK_GRID]
DEFAULT_N = {"sample": 10_000, "nfe": 100_000, "nfe2": 100_000, "prop1": 20_000, "selfdecomp": 20_000, "section3": 100_000}


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def dump_report(doc):
    """Serialize with ``repr``-exact floats, so re-parsing is lossless."""
    return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"


def write_csv(path, values, meta, header=None):
    """``# key=value`` lines, an optional column header, then one row per line."""
    lines = [f"# {k}={_meta_value(v)}" for k, v in meta.items()]
    if header:
        lines.append(header)
    for v in values:
        lines.append(",".join(_cell(x) for x in v) if isinstance(v, (tuple, list)) else _cell(v))
    Path(path).write_text("\n".join(lines) + "\n")


def _cell(x):
    # counts stay integers; floats use repr so they re-parse exactly
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _meta_value(v):
    return json.dumps(v, sort_keys=True, default=_jsonable) if isinstance(v, (dict, list, tuple)) else str(v)


def histogram(values):
    """100 equal-width bins on ``[0, q99.5]``; returns edges, counts and overflow."""
    v = np.asarray(values, dtype=float)
    hi = float(np.quantile(v, HIST_QUANTILE))
    if not hi > 0:
        hi = float(np.max(v)) if np.max(v) > 0 else 1.0
    edges = np.linspace(0.0, hi, HIST_BINS + 1)
    counts, _ = np.histogram(v, bins=edges)
    return {"edges": edges.tolist(), "counts": counts.tolist(), "above": int(np.sum(v > hi)), "n": int(v.size)}


class _Writer:
    """Collects artifacts and writes them once, at the end of a command."""

    def __init__(self, out):
        self.out = Path(out)
        self.files = []

    def prepare(self):
        self.out.mkdir(parents=True, exist_ok=True)
        probe = self.out / ".write-test"
        probe.write_text("")
        probe.unlink()

    def samples(self, stem, values, meta):
        # sorted, so the file does not depend on replica order
        values = np.sort(np.asarray(values, dtype=float))
        h = histogram(values)
        self.files.append((f"{stem}.csv", values, {**meta, "order": "ascending"}, None))
        hmeta = {**meta, "bins": HIST_BINS, "lo": 0.0, "hi": h["edges"][-1], "above": h["above"]}
        self.files.append((f"{stem}.hist.csv", h["counts"], hmeta, None))
        return {"csv": f"{stem}.csv", "histogram_csv": f"{stem}.hist.csv", "histogram": h}

    def table(self, name, rows, meta, header):
        self.files.append((name, rows, meta, header))
        return name

    def flush(self, doc):
        for name, rows, meta, header in self.files:
            write_csv(self.out / name, rows, meta, header)
        (self.out / "report.json").write_text(dump_report(doc))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _require_exponent(plan):
    if plan.exponent is None:
        raise ConfigError("no exponent given: set 'family' in --config or pass --family")
    return plan.target()


def _kind(e):
    return "subordinator" if isinstance(e, SubordinatorExponent) else "sn"


def _values_on(e, grid):
    if isinstance(e, BernsteinDual):
        return [float(e(u)) for u in grid]
    if isinstance(e, SubordinatorExponent):
        return [float(eval_phi(e, u)) for u in grid]
    return [float(eval_psi(e, u)) for u in grid]


def cmd_eval(plan, w):
    e = _require_exponent(plan)
    grid = plan.grid or DEFAULT_GRID
    vals = _values_on(e, grid)
    meta = {"exponent": _describe(e), "seed": plan.seed}
    w.table("eval.csv", list(zip(grid, vals)), meta, "u,value")
    return {"command": "eval", "exponent": _describe(e), "grid": grid, "values": vals, "passed": True, "csv": "eval.csv"}


def _describe(e):
    if isinstance(e, BernsteinDual):
        return {"dual_of": e.phi.describe(), "is_bernstein": e.is_bernstein}
    return e.describe()


def cmd_transform(plan, w):
    if not plan.transforms:
        raise ConfigError("transform needs at least one transform (--transform or 'transforms')")
    e = _require_exponent(plan)
    grid = plan.grid or DEFAULT_GRID
    vals = _values_on(e, grid)
    doc = {"command": "transform", "transforms": plan.transforms, "exponent": _describe(e), "grid": grid, "values": vals}
    if isinstance(e, BernsteinDual):
        doc["violations"] = list(e.violations)
        doc["passed"] = True
    elif e.closed_form is None:
        doc["cross_check_max_rel"] = None
        doc["passed"] = True
    else:
        rel = cross_check(e)
        doc["cross_check_max_rel"] = rel
        doc["passed"] = rel <= CROSS_CHECK_RTOL
    w.table("transform.csv", list(zip(grid, vals)), {"exponent": _describe(e)}, "u,value")
    doc["csv"] = "transform.csv"
    return doc


def cmd_moments(plan, w):
    e = _require_exponent(plan)
    if isinstance(e, BernsteinDual):
        raise ConfigError("moments need a Lévy exponent, not a dual function")
    kind = plan.moments or ("positive" if _kind(e) == "subordinator" else "negative")
    fn = {"positive": mom.expfun_pos_moments, "negative": mom.expfun_neg_moments, "entrance": mom.entrance_moments}[kind]
    want = SubordinatorExponent if kind == "positive" else SNExponent
    if not isinstance(e, want):
        raise ConfigError(f"{kind} moments need a {'subordinator' if want is SubordinatorExponent else 'spectrally negative'} exponent")
    try:
        seq = fn(e, plan.orders)
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(str(exc)) from None
    rows = [(int(k), float(v)) for k, v in zip(seq.orders, seq.values)]
    w.table("moments.csv", rows, {"exponent": e.describe(), "source": seq.source}, "order,value")
    return {
        "command": "moments", "exponent": e.describe(), "source": seq.source,
        "orders": list(seq.orders), "values": list(seq.values), "log_values": list(seq.log_values),
        "hankel_ok": seq.hankel_ok(), "passed": True, "csv": "moments.csv",
    }


def cmd_sample(plan, w):
    e = _require_exponent(plan)
    n = plan.n or DEFAULT_N["sample"]
    rs = RngState(plan.seed).child("sample")
    functional = plan.functional or "expfun"
    if functional == "expfun":
        fn = sample_subordinator_expfun if isinstance(e, SubordinatorExponent) else sample_sn_expfun
        b = fn(e, plan.path, rs, n)
    elif not isinstance(e, SNExponent):
        raise ConfigError(f"functional {functional!r} needs a spectrally negative exponent")
    elif functional == "entrance":
        b = sample_entrance_law(e, plan.path, rs, n)
    else:
        b = sample_affine_rhs(e, plan.y[0], plan.path, rs, n)
    meta = {"functional": b.meta["functional"], "n": n, "seed": plan.seed, "config": plan.path.as_dict()}
    art = w.samples("samples", b.values, meta)
    ok = b.diagnostics["truncated_fraction"] < 0.01 and not b.diagnostics.get("step_warning", False)
    return {
        "command": "sample", "meta": b.meta, "diagnostics": b.diagnostics, "passed": ok,
        "mean": float(np.mean(b.values)), "artifacts": art,
    }


def _default_exponent(identity):
    if identity == "nfe":
        return families.exponential_jump()
    return families.brownian(1.0, 1.0)


def _verify_reports(plan, identity, e):
    n = plan.n or DEFAULT_N[identity]
    s, c = plan.seed, plan.path
    if identity == "section3":
        alpha = plan.alpha if plan.alpha is not None else plan.params.get("alpha", 0.5)
        return V.verify_section3(alpha, n, s, c)
    e = e if e is not None else _default_exponent(identity)
    want = SubordinatorExponent if identity == "nfe" else SNExponent
    if not isinstance(e, want):
        raise ConfigError(f"identity {identity!r} needs a {'subordinator' if want is SubordinatorExponent else 'spectrally negative'} exponent")
    try:
        if identity == "nfe":
            return [V.verify_nfe(e, n, s, c)]
        if identity == "nfe2":
            return [V.verify_nfe2(e, n, s, c)]
        if identity == "prop1":
            return [V.verify_prop1(e, n, s, c)]
        return [V.verify_selfdecomp(e, y, n, s, c) for y in plan.y]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _emit_reports(reports, w):
    out = []
    for i, r in enumerate(reports):
        d = r.to_dict()
        stem = (r.name or r.identity).replace("/", "_").replace("=", "")
        if len(reports) > 1 and not r.name:
            stem = f"{stem}-{i}"
        d["artifacts"] = {
            k: w.samples(f"{stem}.{k}", v, {"report": r.name or r.identity, "sample": k, "seed": r.seed, "n": r.n})
            for k, v in sorted(r.samples.items())
        }
        out.append(d)
        _warn_steps(r)
    return out


def _warn_steps(r):
    for key, b in r.batches.items():
        if b["diagnostics"].get("step_warning"):
            log.warning(
                "%s/%s: step-size warning, %.1f%% of paths had a single step above 10%% of the functional",
                r.name or r.identity, key, 100 * b["diagnostics"]["step_warning_fraction"],
            )
        if b["diagnostics"].get("truncated_fraction", 0) >= 0.01:
            log.warning("%s/%s: %.2f%% of paths hit max_time", r.name or r.identity, key, 100 * b["diagnostics"]["truncated_fraction"])


def cmd_verify(plan, w, identity=None):
    ids = [identity] if identity else (plan.verify or [])
    if not ids:
        raise ConfigError(f"verify needs --identity or 'verify' in the config; choose from {list(IDENTITIES)}")
    e = plan.target() if plan.exponent is not None else None
    reports = []
    for ident in ids:
        reports.extend(_verify_reports(plan, ident, e))
    for r in reports:
        log.info("%s: %s", r.name or r.identity, "pass" if r.passed else "FAIL")
    docs = _emit_reports(reports, w)
    return {"command": "verify", "seed": plan.seed, "passed": all(r.passed for r in reports), "reports": docs}


def cmd_suite(plan, w):
    def progress(r):
        name = getattr(r, "name", None) or getattr(r, "label", "")
        log.info("%s: %s", name, "pass" if r.passed else "FAIL")

    res = suite_mod.run_suite(plan.seed, plan.path, plan.n, progress=progress)
    doc = res.to_dict()
    doc["command"] = "suite"
    doc["reports"] = _emit_reports(res.reports, w)
    return doc


COMMANDS = {
    "eval": cmd_eval,
    "transform": cmd_transform,
    "moments": cmd_moments,
    "sample": cmd_sample,
    "verify": cmd_verify,
    "suite": cmd_suite,
}


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _param(text):
    k, sep, v = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        val = json.loads(v)
    except json.JSONDecodeError:
        val = v
    return k, val


def _u64(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="expfun", description="Exponential functionals of Lévy processes.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML or JSON plan")
    common.add_argument("--seed", type=_u64, help="unsigned 64-bit seed (default 1729)")
    common.add_argument("--out", type=Path, default=Path("expfun-out"), help="output directory")
    common.add_argument("--n", type=int, help="sample size")
    common.add_argument("--alpha", type=float, help="stable index for stable/dual families and section3")
    common.add_argument("--identity", choices=IDENTITIES, help="identity for the verify command")
    common.add_argument("--eps", type=float, help="jump cutoff")
    common.add_argument("--dt", type=float, help="Euler step")
    common.add_argument("--family", help="builtin family name")
    common.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
                        help="family parameter (repeatable)")
    common.add_argument("--transform", choices=TRANSFORMS, action="append", help="transform to apply (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "eval": "exponent values on a grid",
        "transform": "apply transforms and cross-check both evaluation routes",
        "moments": "exact moment sequence",
        "sample": "draw a batch of a functional",
        "verify": "run one identity check",
        "suite": "run the acceptance battery",
    }
    for name, h in helps.items():
        sp = sub.add_parser(name, parents=[common], help=h)
        if name == "sample":
            sp.add_argument("--functional", choices=("expfun", "entrance", "affine"))
            sp.add_argument("--y", type=float, help="level for the affine functional")
        if name == "moments":
            sp.add_argument("--orders", type=int, help="number of orders")
            sp.add_argument("--kind", choices=("positive", "negative", "entrance"))
    return p


def _plan_from_args(args):
    text = {}
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
    over = {"seed": args.seed, "n": args.n, "alpha": args.alpha, "eps": args.eps, "dt": args.dt}
    if args.family:
        over["family"] = args.family
    over.update(dict(args.param))
    if args.transform:
        over["transforms"] = args.transform
    if getattr(args, "functional", None):
        over["functional"] = args.functional
    if getattr(args, "y", None) is not None:
        over["y"] = args.y
    if getattr(args, "orders", None) is not None:
        over["orders"] = args.orders
    if getattr(args, "kind", None):
        over["moments"] = args.kind
    return parse_config(text, over)


def run(plan: Plan, command: str, out, identity=None):
    """Execute `command` for `plan`, writing artifacts into `out`; returns the exit status."""
    w = _Writer(out)
    try:
        w.prepare()
    except OSError as exc:
        log.error("cannot write to %s: %s", out, exc.strerror or exc)
        return EXIT_CONFIG
    try:
        if command == "verify":
            doc = cmd_verify(plan, w, identity)
        else:
            doc = COMMANDS[command](plan, w)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    doc.setdefault("seed", plan.seed)
    doc.setdefault("config", plan.path.as_dict())
    try:
        w.flush(doc)
    except OSError as exc:
        log.error("cannot write to %s: %s", out, exc.strerror or exc)
        return EXIT_CONFIG
    status = EXIT_OK if doc["passed"] else EXIT_FAIL
    log.info("%s: %s (report in %s)", command, "pass" if status == EXIT_OK else "FAIL", Path(out) / "report.json")
    return status


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr
    )
    try:
        plan = _plan_from_args(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return run(plan, args.command, args.out, args.identity)


if __name__ == "__main__":
    sys.exit(main())
