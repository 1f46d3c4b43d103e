"""Experiment configuration files.

Configs are YAML documents; the schema is documented in the README and
enforced here.  Every diagnostic names the line of the offending entry.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import yaml

SCHEMA_VERSION = 1

SCALAR_CASES = ("T1_item1", "T1_item2", "T1_item3", "T2_case1", "T2_case2", "T2_case3", "T4_global")


class ConfigError(ValueError):
    """Invalid config; ``str()`` reads ``source:line: message``."""

    def __init__(self, message, line=None, source=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.source = source

    def __str__(self):
        where = "".join(f"{x}:" for x in (self.source, self.line) if x is not None)
        return f"{where} {self.message}" if where else self.message


@dataclass
class _Loc:
    """Plain value plus the 1-based line it came from."""

    value: object
    line: int


def _to_loc(node):
    line = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = yaml.safe_load(yaml.serialize(k))
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", k.start_mark.line + 1)
            out[key] = (_to_loc(v), k.start_mark.line + 1)
        return _Loc(out, line)
    if isinstance(node, yaml.SequenceNode):
        return _Loc([_to_loc(v) for v in node.value], line)
    return _Loc(yaml.safe_load(yaml.serialize(node)), line)


class _Reader:
    """Pulls typed values out of a located mapping, rejecting unknown keys."""

    def __init__(self, loc, what):
        if not isinstance(loc.value, dict):
            raise ConfigError(f"{what} must be a mapping", loc.line)
        self.loc = loc
        self.what = what
        self.used = set()

    def has(self, key):
        return key in self.loc.value

    def line(self, key):
        return self.loc.value[key][1] if key in self.loc.value else self.loc.line

    def raw(self, key):
        self.used.add(key)
        return self.loc.value[key][0]

    def get(self, key, kind, default=None, required=False, choices=None):
        if key not in self.loc.value:
            if required:
                raise ConfigError(f"{self.what}: missing required key {key!r}", self.loc.line)
            return default
        loc = self.raw(key)
        val = _plain(loc)
        line = self.line(key)
        if kind in (float, "numbers"):
            # YAML 1.1 reads exponents without a dot (1e-10) as strings
            val = [_number(x) for x in val] if isinstance(val, list) else _number(val)
        if kind is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{self.what}.{key} must be a number, got {val!r}", line)
            val = float(val)
        elif kind is int:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{self.what}.{key} must be an integer, got {val!r}", line)
        elif kind is str:
            if not isinstance(val, str):
                raise ConfigError(f"{self.what}.{key} must be a string, got {val!r}", line)
        elif kind == "numbers":
            items = val if isinstance(val, list) else [val]
            if not items or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in items):
                raise ConfigError(f"{self.what}.{key} must be a number or list of numbers", line)
            val = items
        if choices is not None and val not in choices:
            raise ConfigError(f"{self.what}.{key} must be one of {list(choices)}, got {val!r}", line)
        return val

    def finish(self):
        extra = [k for k in self.loc.value if k not in self.used]
        if extra:
            key = extra[0]
            raise ConfigError(f"{self.what}: unknown key {key!r}", self.line(key))


def _number(x):
    if isinstance(x, str):
        try:
            return float(x)
        except ValueError:
            return x
    return x


def _plain(loc):
    if isinstance(loc.value, dict):
        return {k: _plain(v) for k, (v, _) in loc.value.items()}
    if isinstance(loc.value, list):
        return [_plain(v) for v in loc.value]
    return loc.value


def _positive(r, key, val):
    if val is not None and not val > 0:
        raise ConfigError(f"{r.what}.{key} must be positive", r.line(key))
    return val


def _grid(r, kind):
    g = _Reader(r.raw("grid"), "grid") if r.has("grid") else None
    if g is None:
        raise ConfigError(f"{r.what}: missing required key 'grid'", r.loc.line)
    if kind == "scalar":
        dim = g.get("dim", int, 1, choices=(1, 2))
        n = [int(x) for x in g.get("n", "numbers", required=True)]
        ext = g.get("extent", "numbers", None)
        if len(n) == 1:
            n = n * dim
        if ext is None:
            ext = [k + 1.0 for k in n]
        elif len(ext) == 1:
            ext = ext * dim
        if len(n) != dim or len(ext) != dim:
            raise ConfigError("grid.n and grid.extent need one entry per axis", g.loc.line)
        if min(n) < 1 or min(ext) <= 0:
            raise ConfigError("grid sizes and extents must be positive", g.loc.line)
        out = {"dim": dim, "n": n, "extent": [float(e) for e in ext]}
    else:
        cells = [int(x) for x in g.get("cells", "numbers", required=True)]
        if len(cells) == 1:
            cells = cells * 2
        ext = g.get("extent", "numbers", None)
        if ext is None:
            ext = [float(c) for c in cells]
        elif len(ext) == 1:
            ext = ext * 2
        margin = g.get("margin", int, 2)
        edges = g.get("edges", str, "free", choices=("free", "dirichlet"))
        if margin < 2 or min(cells) < 2 * margin + 1:
            raise ConfigError("grid.margin must be >= 2 and leave at least one cell inside",
                              g.line("margin"))
        out = {"cells": cells, "extent": [float(e) for e in ext], "margin": margin, "edges": edges}
    g.finish()
    return out


def _params(r, kind):
    if not r.has("params"):
        raise ConfigError(f"{r.what}: missing required key 'params'", r.loc.line)
    q = _Reader(r.raw("params"), "params")
    out = {}
    for key in ("gamma", "alpha", "beta"):
        out[key] = _positive(q, key, q.get(key, float, 1.0))
    if kind == "complex":
        out["rho"] = q.get("rho", float, 1.0)
        if out["rho"] < 0:
            raise ConfigError("params.rho must be nonnegative", q.line("rho"))
        out["magnetic_weight"] = _positive(q, "magnetic_weight", q.get("magnetic_weight", float, None))
        out["B0"] = q.get("B0", float, 0.0)
        out["temperature"] = q.get("temperature", float, None)
        if out["temperature"] is not None and not 0 <= out["temperature"] < 1:
            raise ConfigError("params.temperature must lie in [0, 1)", q.line("temperature"))
    q.finish()
    return out


def _source(r, kind):
    if not r.has("source"):
        return {"type": "zero"}
    s = _Reader(r.raw("source"), "source")
    types = ("zero", "constant", "random", "manufactured") if kind == "scalar" else ("zero", "constant", "random")
    t = s.get("type", str, required=True, choices=types)
    out = {"type": t}
    if t == "constant":
        out["value"] = s.get("value", float, required=True)
    elif t == "random":
        out["amplitude"] = s.get("amplitude", float, 1.0)
        out["seed"] = s.get("seed", int, 0)
    elif t == "manufactured":
        u = _Reader(s.raw("u0"), "source.u0") if s.has("u0") else None
        if u is None:
            raise ConfigError("source: manufactured sources need a 'u0' entry", s.loc.line)
        out["u0"] = {"type": u.get("type", str, required=True, choices=("constant", "bump")),
                     "value": u.get("value", float, required=True)}
        u.finish()
    s.finish()
    return out


_CHECK_OPTIONS = {
    "scalar": {
        "analytic_zero": {"tol": (float, 1e-12)},
        "gap": {"cases": (None, "auto"), "tol": (float, 1e-8), "sampler_budget": (int, 64)},
        "second_variation": {"probe_eps": (float, None), "mode": (str, "gradient")},
        "weak_duality": {"n_samples": (int, 1000), "tol": (float, 1e-10)},
        "global_criterion": {"n_samples": (int, 1000), "tol": (float, 1e-8)},
    },
    "complex": {
        "gauge": {"levels": (int, 4), "factor": (float, 1.8)},
        "coulomb": {"tol": (float, 1e-8)},
        "conjugates": {"tol": (float, 1e-10)},
        "weak_duality": {"n_samples": (int, 1000), "tol": (float, 1e-10), "reduced_every": (int, 0)},
    },
}


def _checks(r, kind):
    if not r.has("checks"):
        raise ConfigError(f"{r.what}: missing required key 'checks'", r.loc.line)
    loc = r.raw("checks")
    if not isinstance(loc.value, list):
        raise ConfigError("checks must be a list", loc.line)
    out = []
    for item in loc.value:
        c = _Reader(item, "check")
        name = c.get("check", str, required=True, choices=tuple(_CHECK_OPTIONS[kind]))
        spec = {"check": name}
        for key, (typ, default) in _CHECK_OPTIONS[kind][name].items():
            if key == "cases":
                spec[key] = _cases(c)
            else:
                spec[key] = c.get(key, typ, default)
        if spec.get("mode", "gradient") not in ("gradient", "value"):
            raise ConfigError("check.mode must be 'gradient' or 'value'", c.line("mode"))
        if spec.get("n_samples", 1) < 1:
            raise ConfigError("check.n_samples must be at least 1", c.line("n_samples"))
        c.finish()
        out.append(spec)
    return out


def _cases(c):
    if not c.has("cases"):
        return "auto"
    val = _plain(c.raw("cases"))
    if val == "auto":
        return "auto"
    items = val if isinstance(val, list) else [val]
    for x in items:
        if x not in SCALAR_CASES:
            raise ConfigError(f"unknown theorem case {x!r}; expected one of {list(SCALAR_CASES)}",
                              c.line("cases"))
    if len(set(items)) != len(items):
        raise ConfigError("theorem cases must not repeat", c.line("cases"))
    return list(items)


def _experiment(loc, index, default_seed):
    r = _Reader(loc, f"experiments[{index}]")
    kind = r.get("kind", str, "scalar", choices=("scalar", "complex"))
    exp = {
        "name": r.get("name", str, f"experiment{index}"),
        "kind": kind,
        "grid": _grid(r, kind),
        "params": _params(r, kind),
        "source": _source(r, kind),
        "seed": r.get("seed", int, default_seed),
    }
    if kind == "scalar":
        exp["K_margin"] = _positive(r, "K_margin", r.get("K_margin", float, 0.25))
        starts = r.get("starts", None, ["zero"])
        starts = starts if isinstance(starts, list) else [starts]
        for s in starts:
            if s not in ("zero", "plus_bump", "minus_bump", "random", "manufactured"):
                raise ConfigError(f"unknown start {s!r}", r.line("starts"))
        exp["starts"] = starts
        exp["newton_tol"] = _positive(r, "newton_tol", r.get("newton_tol", float, 1e-10))
        exp["max_iters"] = r.get("max_iters", int, 200)
    exp["checks"] = _checks(r, kind)
    r.finish()
    return exp


def parse_config(text, source=None):
    """Parse and validate config text; returns a plain dict."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"malformed YAML: {getattr(exc, 'problem', exc)}", line, source) from None
    if node is None:
        raise ConfigError("empty config", None, source)
    try:
        r = _Reader(_to_loc(node), "config")
        version = r.get("schema_version", int, required=True)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}; expected {SCHEMA_VERSION}",
                              r.line("schema_version"))
        cfg = {
            "schema_version": version,
            "name": r.get("name", str, "experiment"),
            "seed": r.get("seed", int, 0),
        }
        if not r.has("experiments"):
            raise ConfigError("config: missing required key 'experiments'", r.loc.line)
        exps = r.raw("experiments")
        if not isinstance(exps.value, list) or not exps.value:
            raise ConfigError("experiments must be a non-empty list", exps.line)
        cfg["experiments"] = [_experiment(e, i, cfg["seed"]) for i, e in enumerate(exps.value)]
        names = [e["name"] for e in cfg["experiments"]]
        if len(set(names)) != len(names):
            raise ConfigError("experiment names must be unique", exps.line)
        r.finish()
    except ConfigError as exc:
        if exc.source is None:
            exc.source = source
        raise
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", None, str(path)) from None
    return parse_config(text, str(path))


def with_param(cfg, name, value):
    """Copy of ``cfg`` with one coefficient set in every experiment."""
    out = copy.deepcopy(cfg)
    for exp in out["experiments"]:
        if name not in exp["params"]:
            raise ConfigError(f"experiment {exp['name']!r} has no parameter {name!r}")
        if name in ("gamma", "alpha", "beta") and not value > 0:
            raise ConfigError(f"{name} must be positive")
        exp["params"][name] = float(value)
    return out
