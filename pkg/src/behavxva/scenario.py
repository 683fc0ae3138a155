"""JSON scenario files: schema, loading, and dumping.

Spreads are given in basis points (``*_bps`` keys) and converted to decimals
once here. Each bps key also has a decimal twin (``spread``,
``bank_spread``...) so that dumping a scenario never loses bits. Unset
fields take the table-reproduction preset: recovery 40%, riskless 2%, bank
spread 100bps, IM remunerated at riskless, gamma_K 10%, phi 0.
"""

from __future__ import annotations

import json
import re
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .chain import ChainSpec
from .credit import CreditCurve, RateSpec
from .engine import ADJUSTMENTS, PRIMARY_ROLE, ROLES, CCPHedge, Scenario
from .profiles import ExposureProfile

PRESET_RECOVERY = 0.4
PRESET_RATES = RateSpec(riskless_rate=0.02, bank_spread=0.01)

_NONNEG = {"type": "number", "minimum": 0}
_RECOVERY = {"type": "number", "minimum": 0, "exclusiveMaximum": 1}


def _spread_pair(name: str) -> dict[str, Any]:
    return {f"{name}_bps": _NONNEG, name: _NONNEG}


_PROFILE = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "shape": {"enum": ["decreasing", "flat", "increasing", "piecewise"]},
        "scale": _NONNEG,
        "maturity": {"type": "number", "exclusiveMinimum": 0},
        "points": {
            "type": "array",
            "minItems": 2,
            "items": {"type": "array", "prefixItems": [_NONNEG, _NONNEG],
                      "minItems": 2, "maxItems": 2},
        },
    },
    "anyOf": [{"required": ["shape"]}, {"required": ["points"]}],
}

_PROFILES = {
    "type": "object",
    "additionalProperties": False,
    "properties": {role: _PROFILE for role in ROLES},
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["client", "hedge", "profiles", "maturity_years"],
    "properties": {
        "client": {
            "type": "object",
            "additionalProperties": False,
            "properties": {**_spread_pair("spread"), "recovery": _RECOVERY},
            "oneOf": [{"required": ["spread_bps"]}, {"required": ["spread"]}],
        },
        "hedge": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode"],
            "properties": {
                "mode": {"enum": ["ccp", "chain"]},
                **_spread_pair("spread"),
                "hazard": _NONNEG,
                "recovery": _RECOVERY,
                "contagion_multiplier": {"type": "number", "minimum": 1},
                "truncation": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "n": {"type": "integer", "minimum": 1},
                        "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                    },
                    "oneOf": [{"required": ["n"]}, {"required": ["epsilon"]}],
                },
            },
            "if": {"properties": {"mode": {"const": "chain"}}},
            "then": {"oneOf": [{"required": ["spread_bps"]}, {"required": ["spread"]},
                              {"required": ["hazard"]}]},
        },
        "rates": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "riskless": {"type": "number"},
                **_spread_pair("bank_spread"),
                **_spread_pair("collateral_spread"),
                **_spread_pair("im_spread"),
                "im_rate_received": {"type": "number"},
                "gamma_k": {"type": "number"},
                "phi": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
        "profiles": _PROFILES,
        "client_profiles": _PROFILES,
        "maturity_years": {"type": "number", "exclusiveMinimum": 0},
        "lgd_client": {"type": "number", "minimum": 0, "maximum": 1},
        "adjustments": {"type": "array", "items": {"enum": list(ADJUSTMENTS)}, "uniqueItems": True},
        "quadrature_tol": {"type": "number", "exclusiveMinimum": 0},
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


class ScenarioError(ValueError):
    """Scenario file could not be read, parsed, or validated."""


def _locate(text: str | None, path: list) -> str:
    """Best-effort ``line N`` for the last key of a JSON path."""
    if not text:
        return ""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return ""
    pos = 0
    for key in keys:
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if m is None:
            return ""
        pos = m.start()
    return f" (line {text.count(chr(10), 0, pos) + 1})"


def validate(doc: Any, text: str | None = None, source: str = "<scenario>") -> None:
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for e in errors:
            field = ".".join(str(p) for p in e.absolute_path) or "<root>"
            msgs.append(f"{source}: {field}{_locate(text, list(e.absolute_path))}: {e.message}")
        raise ScenarioError("\n".join(msgs))


def _bps(section: dict, name: str, default: float | None = None) -> float | None:
    if f"{name}_bps" in section:
        return section[f"{name}_bps"] / 1e4
    return section.get(name, default)


def _profile(spec: dict, maturity: float) -> ExposureProfile:
    mat = spec.get("maturity", maturity)
    scale = spec.get("scale", 1.0)
    if "points" in spec:
        if spec.get("shape", "piecewise") != "piecewise":
            raise ScenarioError("points given with a non-piecewise shape")
        return ExposureProfile.piecewise(spec["points"], scale, spec.get("maturity", maturity))
    return ExposureProfile(spec["shape"], scale, mat)


def parse_scenario(doc: dict, text: str | None = None, source: str = "<scenario>") -> Scenario:
    """Validate a decoded document and build a fully-resolved Scenario."""
    validate(doc, text, source)
    T = float(doc["maturity_years"])
    c = doc["client"]
    client = CreditCurve(_bps(c, "spread"), c.get("recovery", PRESET_RECOVERY))
    h = doc["hedge"]
    if h["mode"] == "ccp":
        hedge = CCPHedge()
    else:
        recovery = h.get("recovery", PRESET_RECOVERY)
        if "hazard" in h:
            hazard = h["hazard"]
        else:
            hazard = CreditCurve(_bps(h, "spread"), recovery).hazard
        trunc = h.get("truncation", {})
        hedge = ChainSpec(hazard, h.get("contagion_multiplier", 1.0), trunc.get("n"),
                          trunc.get("epsilon"), recovery)
    r = doc.get("rates", {})
    rates = RateSpec(
        riskless_rate=r.get("riskless", PRESET_RATES.riskless_rate),
        bank_spread=_bps(r, "bank_spread", PRESET_RATES.bank_spread),
        collateral_spread=_bps(r, "collateral_spread", PRESET_RATES.collateral_spread),
        im_spread_posted=_bps(r, "im_spread", PRESET_RATES.im_spread_posted),
        im_rate_received=r.get("im_rate_received", PRESET_RATES.im_rate_received),
        capital_cost=r.get("gamma_k", PRESET_RATES.capital_cost),
        capital_funding_fraction=r.get("phi", PRESET_RATES.capital_funding_fraction),
    )
    profiles = {role: _profile(p, T) for role, p in doc["profiles"].items()}
    client_profiles = {role: _profile(p, T) for role, p in doc.get("client_profiles", {}).items()}
    if "adjustments" in doc:
        adjustments = tuple(doc["adjustments"])
    else:
        adjustments = tuple(a for a in ADJUSTMENTS if PRIMARY_ROLE[a] in profiles
                            and not (a == "cva" and isinstance(hedge, CCPHedge)))
    try:
        return Scenario(client, hedge, rates, T, profiles, client_profiles,
                        lgd_client=doc.get("lgd_client"), adjustments=adjustments,
                        quadrature_tol=doc.get("quadrature_tol", 1e-8))
    except ValueError as e:
        raise ScenarioError(f"{source}: {e}") from e


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{source}: line {e.lineno} column {e.colno}: {e.msg}") from e
    return parse_scenario(doc, text, source)


def preset_names() -> list[str]:
    root = resources.files("behavxva") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> Scenario:
    res = resources.files("behavxva") / "presets" / f"{name}.json"
    if not res.is_file():
        raise ScenarioError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return loads_scenario(res.read_text(), f"preset:{name}")


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario file; a bare preset name is accepted too."""
    p = Path(path)
    if not p.exists():
        if str(path) in preset_names():
            return load_preset(str(path))
        raise ScenarioError(f"{path}: no such file")
    try:
        text = p.read_text()
    except OSError as e:
        raise ScenarioError(f"{path}: {e}") from e
    return loads_scenario(text, str(path))


def _spread_out(out: dict, name: str, value: float) -> None:
    bps = value * 1e4
    if bps / 1e4 == value:
        out[f"{name}_bps"] = bps
    else:
        out[name] = value


def _profile_out(p: ExposureProfile, maturity: float) -> dict:
    d: dict[str, Any] = {"shape": p.shape, "scale": p.scale}
    if p.shape == "piecewise":
        d["points"] = [list(pt) for pt in p.points]
    if p.maturity != maturity:
        d["maturity"] = p.maturity
    return d


def scenario_to_dict(sc: Scenario) -> dict:
    client: dict[str, Any] = {"recovery": sc.client.recovery}
    _spread_out(client, "spread", sc.client.spread)
    if isinstance(sc.hedge, CCPHedge):
        hedge: dict[str, Any] = {"mode": "ccp"}
    else:
        spec = sc.hedge
        hedge = {"mode": "chain", "recovery": spec.recovery,
                 "contagion_multiplier": spec.contagion_multiplier,
                 "truncation": {"n": spec.n}}
        _spread_out(hedge, "spread", spec.base_spread)
        # the chain keeps a hazard; fall back to it when the spread does not convert back exactly
        if CreditCurve(_bps(hedge, "spread"), spec.recovery).hazard != spec.base_hazard:
            hedge.pop("spread_bps", None)
            hedge.pop("spread", None)
            hedge["hazard"] = spec.base_hazard
    r = sc.rates
    rates: dict[str, Any] = {"riskless": r.riskless_rate, "im_rate_received": r.im_rate_received,
                             "gamma_k": r.capital_cost, "phi": r.capital_funding_fraction}
    _spread_out(rates, "bank_spread", r.bank_spread)
    _spread_out(rates, "collateral_spread", r.collateral_spread)
    _spread_out(rates, "im_spread", r.im_spread_posted)
    doc: dict[str, Any] = {
        "client": client,
        "hedge": hedge,
        "rates": rates,
        "profiles": {k: _profile_out(v, sc.maturity) for k, v in sc.profiles.items()},
        "maturity_years": sc.maturity,
        "adjustments": list(sc.adjustments),
        "quadrature_tol": sc.quadrature_tol,
    }
    if sc.client_profiles:
        doc["client_profiles"] = {k: _profile_out(v, sc.maturity) for k, v in sc.client_profiles.items()}
    if sc.lgd_client is not None:
        doc["lgd_client"] = sc.lgd_client
    return doc


def dumps_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2, sort_keys=True) + "\n"


def save_scenario(sc: Scenario, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dumps_scenario(sc))
    return path
