"""Flat key-value scenario configuration: `key = value`, `#` comments.

Parsing is strict: unknown keys, type mismatches and missing required keys
are all reported together, each with its line number.  Physics-bearing keys
(rates, temperatures, model parameters) have no defaults; only numerical
controls (grids, tolerances, switches) do, and every applied default is
recorded so the run manifest can echo it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["ConfigError", "FieldSpec", "ScenarioConfig", "parse_config",
           "parse_config_text", "SCHEMAS"]


class ConfigError(ValueError):
    """Aggregates every problem found in a config file."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_str_list(text):
    return [tok.strip() for tok in text.split(",") if tok.strip()]


_PARSERS = {
    "float": float,
    "int": lambda s: int(s, 0),
    "bool": _parse_bool,
    "str": lambda s: s.strip(),
    "floats": _parse_float_list,
    "strs": _parse_str_list,
}


@dataclass(frozen=True)
class FieldSpec:
    kind: str
    required: bool = False
    default: object = None
    choices: tuple = ()
    minimum: float | None = None
    maximum: float | None = None

    def convert(self, text):
        value = _PARSERS[self.kind](text)
        if self.choices and value not in self.choices:
            raise ValueError(f"must be one of {', '.join(map(str, self.choices))}")
        if self.minimum is not None and value < self.minimum:
            raise ValueError(f"must be >= {self.minimum}")
        if self.maximum is not None and value > self.maximum:
            raise ValueError(f"must be <= {self.maximum}")
        return value


_COMMON = {
    "t_final": FieldSpec("float", required=True, minimum=0.0),
    "n_points": FieldSpec("int", default=400, minimum=2),
    "seed": FieldSpec("int", default=1234),
    "rtol": FieldSpec("float", default=1e-8, minimum=0.0),
    "atol": FieldSpec("float", default=1e-12, minimum=0.0),
}

_ENVELOPE = {
    "envelope": FieldSpec("str", default="sudden",
                          choices=("sudden", "exponential")),
    "tau_r": FieldSpec("float", default=0.0, minimum=0.0),
}

SCHEMAS = {
    "vsystem": {
        **_COMMON, **_ENVELOPE,
        "delta": FieldSpec("float", required=True),
        "r1": FieldSpec("float", required=True, minimum=0.0),
        "r2": FieldSpec("float", required=True, minimum=0.0),
        "g1": FieldSpec("float", required=True, minimum=0.0),
        "g2": FieldSpec("float", required=True, minimum=0.0),
        "p": FieldSpec("float", required=True, minimum=-1.0, maximum=1.0),
        "stimulated_decay": FieldSpec("bool", required=True),
        "secular": FieldSpec("bool", default=False),
    },
    "calcium": {
        **_COMMON, **_ENVELOPE,
        "omega0": FieldSpec("float", required=True, minimum=0.0),
        "delta_z": FieldSpec("float", required=True),
        "gamma": FieldSpec("float", required=True, minimum=0.0),
        "nbar": FieldSpec("float", required=True, minimum=0.0),
        "r_iso": FieldSpec("float", required=True, minimum=0.0),
        "secular": FieldSpec("bool", default=False),
    },
    "dimer": {
        **_COMMON,
        "omega_l": FieldSpec("float", required=True, minimum=0.0),
        "omega_r": FieldSpec("float", required=True, minimum=0.0),
        "j": FieldSpec("float", required=True),
        "t_left": FieldSpec("float", required=True, minimum=0.0),
        "t_right": FieldSpec("float", required=True, minimum=0.0),
        "gamma_l": FieldSpec("float", required=True, minimum=0.0),
        "gamma_r": FieldSpec("float", required=True, minimum=0.0),
    },
    "retinal": {
        **_COMMON,
        "E0": FieldSpec("float", required=True),
        "E1": FieldSpec("float", required=True),
        "V0": FieldSpec("float", required=True),
        "V1": FieldSpec("float", required=True),
        "omega": FieldSpec("float", required=True, minimum=0.0),
        "kappa": FieldSpec("float", required=True),
        "lambda": FieldSpec("float", required=True),
        "inv_inertia": FieldSpec("float", required=True, minimum=0.0),
        "mu": FieldSpec("float", required=True, minimum=0.0),
        "T_rad": FieldSpec("float", required=True, minimum=0.0),
        "T_phon": FieldSpec("float", required=True, minimum=0.0),
        "eta": FieldSpec("float", required=True, minimum=0.0),
        "omega_c": FieldSpec("float", required=True, minimum=0.0),
        "n_fourier": FieldSpec("int", default=64, minimum=4),
        "n_ho": FieldSpec("int", default=24, minimum=4),
        "n_keep": FieldSpec("int", default=150, minimum=2),
        "cluster_tol": FieldSpec("float", default=-1.0),  # <0: rate-based rule
        "secular": FieldSpec("bool", default=False),
        "tau_r": FieldSpec("float", default=0.0, minimum=0.0),
        "track": FieldSpec("strs", default=("bright", "intermediate", "product")),
    },
    "pathways": {
        **_COMMON,
        "corr_kind": FieldSpec("str", required=True,
                               choices=("delta", "exponential", "monochromatic")),
        "amplitude": FieldSpec("float", required=True, minimum=0.0),
        "tau_c": FieldSpec("float", default=0.0, minimum=0.0),
        "carrier_omega": FieldSpec("float", default=0.0),
        "omegas": FieldSpec("floats", required=True),
        "dipoles": FieldSpec("floats", required=True),
        "polarization": FieldSpec("floats", default=(1.0, 0.0, 0.0)),
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    values: dict
    defaults_applied: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, fallback=None):
        return self.values.get(key, fallback)


def parse_config_text(text, source="<config>"):
    """Parse and validate; raises ConfigError listing every problem found."""
    errors = []
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value', got {stripped!r}")
            continue
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            errors.append(f"line {lineno}: empty key")
            continue
        if key in raw:
            errors.append(f"line {lineno}: duplicate key {key!r} "
                          f"(first set on line {lines[key]})")
            continue
        raw[key] = value
        lines[key] = lineno

    if "scenario" not in raw:
        errors.append("missing required key 'scenario'")
        raise ConfigError(errors)
    scenario = raw.pop("scenario")
    scenario_line = lines.get("scenario", 0)
    if scenario not in SCHEMAS:
        errors.append(f"line {scenario_line}: unknown scenario {scenario!r}; "
                      f"expected one of {', '.join(sorted(SCHEMAS))}")
        raise ConfigError(errors)
    schema = SCHEMAS[scenario]

    values = {}
    defaults = {}
    for key, text_value in raw.items():
        if key not in schema:
            errors.append(f"line {lines[key]}: unknown key {key!r} for "
                          f"scenario {scenario!r}")
            continue
        try:
            values[key] = schema[key].convert(text_value)
        except ValueError as exc:
            errors.append(f"line {lines[key]}: key {key!r}: {exc}")
    for key, spec in schema.items():
        if key in values:
            continue
        if spec.required:
            errors.append(f"missing required key {key!r} for scenario {scenario!r}")
        else:
            values[key] = spec.default
            defaults[key] = spec.default
    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(scenario, values, defaults)


def parse_config(path):
    with open(path, encoding="utf-8") as handle:
        return parse_config_text(handle.read(), source=str(path))
