"""TOML run configuration: parsing and validation on top of the scenario defaults.

Every scalar key may appear at the top level or inside its section::

    scenario = "linear_landau"
    formulation = "sw"

    [grid]
    nx = 100
    order = 2

    [species.electron]
    u = 0.0

``[species.<name>]`` tables override a default species of that name or add a
new one.
"""

from __future__ import annotations

import re
from dataclasses import replace

from .errors import ConfigurationError
from .scenarios import BeamConfig, Scenario, default_config

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib


def _positive(x):
    return x > 0


def _nonneg(x):
    return x >= 0


SCHEMA = {
    "run": {
        "scenario": (str, lambda s: s in {e.value for e in Scenario},
                     "scenario must be one of " + ",".join(e.value for e in Scenario)),
        "formulation": (str, lambda s: s in ("sw", "sw_sqrt"), "formulation must be one of sw,sw_sqrt"),
    },
    "physics": {
        "length": (float, _positive, "length must be positive"),
        "k": (float, None, None),
        "epsilon": (float, _nonneg, "epsilon must be >= 0"),
        "t_final": (float, _nonneg, "t_final must be >= 0"),
    },
    "grid": {
        "nx": (int, lambda n: n >= 4, "nx must be an integer >= 4"),
        "order": (int, lambda p: p in (2, 4, 6, 8), "order must be one of 2,4,6,8"),
    },
    "hermite": {
        "nv": (int, lambda n: n >= 1, "nv must be an integer >= 1"),
    },
    "time": {
        "dt": (float, _positive, "dt must be positive"),
        "method": (str, lambda s: s in ("implicit_midpoint", "rk3"), "method must be one of implicit_midpoint,rk3"),
        "cadence": (int, lambda n: n >= 1, "cadence must be an integer >= 1"),
    },
    "solver": {
        "newton_rel_tol": (float, _positive, "newton_rel_tol must be positive"),
        "newton_abs_tol": (float, _positive, "newton_abs_tol must be positive"),
        "krylov_rel_tol": (float, _positive, "krylov_rel_tol must be positive"),
        "krylov_restart": (int, lambda n: n >= 1, "krylov_restart must be an integer >= 1"),
        "poisson_method": (str, lambda s: s in ("spectral", "krylov"), "poisson_method must be one of spectral,krylov"),
    },
    "output": {
        "snapshot_times": (list, lambda xs: all(isinstance(x, (int, float)) and x >= 0 for x in xs),
                           "snapshot_times must be a list of non-negative numbers"),
        "snapshot_nv": (int, lambda n: n >= 2, "snapshot_nv must be an integer >= 2"),
    },
}

SPECIES_SCHEMA = {
    "n0": (float, _positive, "n0 must be positive"),
    "u": (float, None, None),
    "alpha_sw": (float, _positive, "alpha_sw must be positive"),
    "alpha_swsr": (float, _positive, "alpha_swsr must be positive"),
    "charge": (float, None, None),
    "mass": (float, _positive, "mass must be positive"),
    "static": (bool, None, None),
}

_KEY_SECTION = {k: sec for sec, keys in SCHEMA.items() for k in keys}


def _line_of(text, key):
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=", re.M)
    m = pat.search(text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(source, text, key, msg):
    line = _line_of(text, key) if key else None
    where = f"{source}:{line}" if line else source
    raise ConfigurationError(f"{where}: {msg}")


def _coerce(value, kind, key, source, text):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(source, text, key, f"{key} must be a number")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            _fail(source, text, key, f"{key} must be an integer")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            _fail(source, text, key, f"{key} must be true or false")
        return value
    if kind is str:
        if not isinstance(value, str):
            _fail(source, text, key, f"{key} must be a string")
        return value.lower()
    if kind is list:
        if not isinstance(value, list):
            _fail(source, text, key, f"{key} must be a list")
        return value
    return value


def _check(key, value, rule, source, text):
    kind, ok, msg = rule
    value = _coerce(value, kind, key, source, text)
    if ok is not None and not ok(value):
        _fail(source, text, key, msg)
    return value


def parse_config_text(text, source="<config>"):
    """Parse TOML text into a validated :class:`ScenarioConfig`."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        where = f"{source}:{m.group(1)}" if m else source
        raise ConfigurationError(f"{where}: parse error: {exc}") from None

    flat = {}
    species_over = {}
    for key, value in raw.items():
        if key == "species":
            if not isinstance(value, dict) or not all(isinstance(v, dict) for v in value.values()):
                _fail(source, text, None, "species must be given as [species.<name>] tables")
            species_over = value
        elif key in SCHEMA and isinstance(value, dict):
            if not isinstance(value, dict):
                _fail(source, text, key, f"{key} must be a section")
            for sub, subval in value.items():
                if sub not in SCHEMA[key]:
                    _fail(source, text, sub, f"unknown key {sub!r} in section [{key}]")
                flat[sub] = _check(sub, subval, SCHEMA[key][sub], source, text)
        elif key in _KEY_SECTION:
            flat[key] = _check(key, value, SCHEMA[_KEY_SECTION[key]][key], source, text)
        else:
            _fail(source, text, key, f"unknown key {key!r}")

    if "scenario" not in flat:
        raise ConfigurationError(f"{source}: missing required key 'scenario'")
    name = flat.pop("scenario")
    if "snapshot_times" in flat:
        flat["snapshot_times"] = tuple(float(t) for t in flat["snapshot_times"])
    try:
        cfg = default_config(name, **flat)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{source}: {exc}") from None

    if species_over:
        beams = {b.name: b for b in cfg.beams}
        order = [b.name for b in cfg.beams]
        for sname, fields in species_over.items():
            vals = {}
            for k, v in fields.items():
                if k not in SPECIES_SCHEMA:
                    _fail(source, text, k, f"unknown key {k!r} in [species.{sname}]")
                vals[k] = _check(k, v, SPECIES_SCHEMA[k], source, text)
            if sname in beams:
                beams[sname] = replace(beams[sname], **vals)
            else:
                beams[sname] = BeamConfig(name=sname, **vals)
                order.append(sname)
        try:
            cfg = replace(cfg, beams=tuple(beams[n] for n in order))
        except ConfigurationError as exc:
            raise ConfigurationError(f"{source}: {exc}") from None
    return cfg


def parse_config(path):
    """Read and validate a TOML run configuration file."""
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    return parse_config_text(text, source=str(path))
