"""Experiment plans: parsing and validation of YAML/JSON config documents.

A plan is a flat mapping.  Example::

    family: exponential-jump
    lam: 1.0
    rho: 2.0
    transforms: [forward]
    verify: [nfe2]
    n: 100000
    seed: 1729
    dt: 0.001

Recognised keys are listed in ``PLAN_KEYS``; a family's own parameters are
accepted next to them.  ``tabulated`` takes ``r`` and ``f`` arrays.  Every
other key is rejected with the line it appears on.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Optional

import yaml

from . import families
from .levy import SNExponent, SubordinatorExponent, validate
from .samplers import PathConfig
from .samplers.rng import DEFAULT_SEED
from .transforms import (
    TransformError,
    prop1_transform,
    special_bernstein_dual,
    theorem1_converse,
    theorem1_forward,
)

__all__ = ["ConfigError", "Plan", "parse_config", "IDENTITIES", "TRANSFORMS", "FUNCTIONALS"]

IDENTITIES = ("nfe", "nfe2", "prop1", "selfdecomp", "section3")
TRANSFORMS = ("forward", "converse", "prop1", "dual")
FUNCTIONALS = ("expfun", "entrance", "affine")
MOMENT_KINDS = ("positive", "negative", "entrance")
PATH_KEYS = tuple(f.name for f in fields(PathConfig))
PLAN_KEYS = (
    "family", "transforms", "verify", "n", "seed", "y", "alpha",
    "grid", "orders", "moments", "functional",
) + PATH_KEYS


class ConfigError(ValueError):
    """Invalid plan; the CLI maps it to exit status 2."""


@dataclass
class Plan:
    """A validated experiment plan."""

    family: Optional[str] = None
    params: dict = field(default_factory=dict)
    exponent: Any = None
    transforms: list = field(default_factory=list)
    verify: list = field(default_factory=list)
    n: Optional[int] = None
    seed: int = DEFAULT_SEED
    y: list = field(default_factory=lambda: [1.0])
    alpha: Optional[float] = None
    grid: Optional[list] = None
    orders: int = 10
    moments: Optional[str] = None
    functional: Optional[str] = None
    path: PathConfig = field(default_factory=PathConfig)

    def target(self):
        """The exponent after applying `transforms` (a BernsteinDual if last is ``dual``)."""
        return apply_transforms(self.exponent, self.transforms)


def apply_transforms(exponent, names):
    out = exponent
    for i, t in enumerate(names):
        if t == "dual" and i != len(names) - 1:
            raise ConfigError("transform 'dual' yields a plain function and must come last")
        try:
            if t == "forward":
                out = theorem1_forward(_need(out, SubordinatorExponent, t))
            elif t == "converse":
                out = theorem1_converse(_need(out, SNExponent, t))
            elif t == "prop1":
                out = prop1_transform(_need(out, SNExponent, t))
            elif t == "dual":
                out = special_bernstein_dual(_need(out, SubordinatorExponent, t))
        except TransformError as exc:
            raise ConfigError(f"transform {t!r}: {exc}") from None
    return out


def _need(exponent, cls, what):
    if not isinstance(exponent, cls):
        kind = "subordinator" if cls is SubordinatorExponent else "spectrally negative"
        raise ConfigError(f"transform {what!r} needs a {kind} exponent")
    return exponent


def _key_lines(text):
    """Line number (1-based) of each top-level key, when recoverable."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value}


def _where(lines, key):
    return f"line {lines[key]}, field {key!r}" if key in lines else f"field {key!r}"


def _load(source):
    if isinstance(source, dict):
        return dict(source), {}
    text = str(source)
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        at = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise ConfigError(f"malformed config: {at}{getattr(exc, 'problem', exc)}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("malformed config: line 1: top level must be a mapping")
    return doc, _key_lines(text)


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _number(doc, key, lines, kind=float, positive=True):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{_where(lines, key)}: expected a number, got {v!r}")
    if kind is int and v != int(v):
        raise ConfigError(f"{_where(lines, key)}: expected an integer, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{_where(lines, key)}: must be positive, got {v!r}")
    return kind(v)


def _choices(doc, key, lines, allowed):
    vals = _as_list(doc[key])
    bad = [v for v in vals if v not in allowed]
    if bad:
        raise ConfigError(f"{_where(lines, key)}: unknown value(s) {bad}; choose from {list(allowed)}")
    return vals


def parse_config(source, overrides=None):
    """Validate a config document into a :class:`Plan`.

    Parameters
    ----------
    source : str or dict
        YAML or JSON text, or an already-parsed mapping.
    overrides : dict, optional
        Keys that take precedence over the document (CLI flags).

    Raises
    ------
    ConfigError
        With a ``line N, field 'k'`` diagnostic for malformed input, unknown
        keys, bad values, or an exponent that fails ``validate``.
    """
    doc, lines = _load(source)
    doc.update({k: v for k, v in (overrides or {}).items() if v is not None})
    family = doc.get("family")
    if family is not None and family not in families.FAMILIES:
        raise ConfigError(f"{_where(lines, 'family')}: unknown family {family!r}; choose from {sorted(families.FAMILIES)}")
    fam_keys = families.FAMILIES[family][2] if family else ()
    unknown = [k for k in doc if k not in PLAN_KEYS and k not in fam_keys]
    if unknown:
        k = unknown[0]
        hint = f" (family {family!r} takes {list(fam_keys)})" if family else ""
        raise ConfigError(f"{_where(lines, k)}: unknown key {k!r}{hint}")

    plan = Plan()
    if "seed" in doc:
        s = doc["seed"]
        if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s < 2**64:
            raise ConfigError(f"{_where(lines, 'seed')}: seed must be an unsigned 64-bit integer, got {s!r}")
        plan.seed = s
    if "n" in doc:
        plan.n = _number(doc, "n", lines, int)
    if "orders" in doc:
        plan.orders = _number(doc, "orders", lines, int)
    if "alpha" in doc:
        plan.alpha = _number(doc, "alpha", lines)
        if not plan.alpha < 1:
            raise ConfigError(f"{_where(lines, 'alpha')}: alpha must lie in (0, 1), got {plan.alpha!r}")
    if "y" in doc:
        plan.y = []
        for v in _as_list(doc["y"]):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"{_where(lines, 'y')}: y must be positive, got {v!r}")
            plan.y.append(float(v))
    if "grid" in doc:
        g = _as_list(doc["grid"])
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in g):
            raise ConfigError(f"{_where(lines, 'grid')}: grid must be a list of numbers")
        plan.grid = [float(v) for v in g]
    if "transforms" in doc:
        plan.transforms = _choices(doc, "transforms", lines, TRANSFORMS)
    if "verify" in doc:
        plan.verify = _choices(doc, "verify", lines, IDENTITIES)
    if "moments" in doc:
        plan.moments = _choices(doc, "moments", lines, MOMENT_KINDS)[0]
    if "functional" in doc:
        plan.functional = _choices(doc, "functional", lines, FUNCTIONALS)[0]
    path = {}
    for k in PATH_KEYS:
        if k in doc:
            path[k] = _number(doc, k, lines)
    plan.path = PathConfig(**{**PathConfig().as_dict(), **path})

    if family is not None:
        params = {k: doc[k] for k in fam_keys if k in doc}
        if "alpha" in fam_keys and "alpha" in doc:
            params["alpha"] = plan.alpha
        plan.family, plan.params = family, params
        try:
            plan.exponent = families.build(family, **params)
        except (TypeError, ValueError) as exc:
            bad = next((k for k in params if k in str(exc)), "family")
            raise ConfigError(f"{_where(lines, bad)}: {exc}") from None
        problems = validate(plan.exponent)
        if problems:
            raise ConfigError("exponent violates its invariants:\n  " + "\n  ".join(problems))
        plan.target()
    return plan
