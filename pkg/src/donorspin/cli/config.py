"""Sectioned key-value run configuration with a strict schema.

Every key has a typed default below; print-config renders them all, so a
config file only needs the keys it overrides. Unknown sections or keys
are usage errors carrying the offending key path.
"""

from __future__ import annotations

import configparser
from typing import Any

from ..constants import (
    BI_G_FACTOR,
    BI_HYPERFINE_MHZ,
    BI_NUCLEAR_SPIN,
    BI_NUCLEAR_ZEEMAN_DELTA,
    SI29_ABUNDANCE,
    SI_LATTICE_NM,
)


class ConfigError(Exception):
    """Malformed configuration; the message names the key path."""


# section -> key -> (type tag, default)
SCHEMA: dict[str, dict[str, tuple[str, Any]]] = {
    "donor": {
        "hyperfine_mhz": ("float", BI_HYPERFINE_MHZ),
        "g_factor": ("float", BI_G_FACTOR),
        "nuclear_zeeman_delta": ("float", BI_NUCLEAR_ZEEMAN_DELTA),
        "nuclear_spin": ("float", BI_NUCLEAR_SPIN),
    },
    "run": {
        "seed": ("int", 2024),
        "workers": ("int", 1),
        "out_dir": ("str", "."),
    },
    "levels": {
        "b_min_t": ("float", 0.0),
        "b_max_t": ("float", 0.6),
        "b_steps": ("int", 241),
    },
    "resonances": {
        "frequency_mhz": ("float", 4044.0),
        "b_min_t": ("float", 0.0),
        "b_max_t": ("float", 0.6),
        "intensity_floor": ("float", 1e-4),
        "fwhm_mt": ("float", 0.7),
        "grid_step_mt": ("float", 0.05),
    },
    "freqmap": {
        "b_min_t": ("float", 0.0),
        "b_max_t": ("float", 0.6),
        "b_steps": ("int", 121),
        "intensity_floor": ("float", 1e-4),
    },
    "rabi": {
        "label_upper": ("int", 11),
        "label_lower": ("int", 10),
        "field_t": ("float", 0.3446),
        "f1_mhz": ("float", 15.625),
        "input_csv": ("optstr", None),
    },
    "cce": {
        "label_upper": ("int", 11),
        "label_lower": ("int", 10),
        "field_t": ("float", 0.3446),
        "side_nm": ("float", 14.0),
        "n_configs": ("int", 20),
        "shell": ("int", 3),
        "t_max_ms": ("float", 1.0),
        "t_steps": ("int", 51),
        "abundance": ("float", SI29_ABUNDANCE),
        "a0_nm": ("float", SI_LATTICE_NM),
        "fit": ("bool", True),
    },
    "converge": {
        "sides_nm": ("floatlist", (7.0, 10.0, 14.0, 18.0)),
        "shells": ("intlist", (2, 3)),
    },
    "fit": {
        "model": ("str", "echo_decay"),
        "input_csv": ("optstr", None),
        "fix_delta_k": ("optfloat", None),
        "n_lines": ("int", 2),
        "mode": ("str", "absorption"),
        "free_amplitude": ("bool", True),
    },
}

_BOOL_WORDS = {"true": True, "false": False, "1": True, "0": False,
               "yes": True, "no": False, "on": True, "off": False}


def _parse_value(tag: str, raw: str, path: str) -> Any:
    raw = raw.strip()
    try:
        if tag == "float":
            return float(raw)
        if tag == "int":
            return int(raw)
        if tag == "str":
            return raw
        if tag == "bool":
            return _BOOL_WORDS[raw.lower()]
        if tag == "optstr":
            return raw or None
        if tag == "optfloat":
            return float(raw) if raw else None
        if tag == "floatlist":
            return tuple(float(tok) for tok in raw.replace(",", " ").split())
        if tag == "intlist":
            return tuple(int(tok) for tok in raw.replace(",", " ").split())
    except (ValueError, KeyError):
        raise ConfigError(f"{path}: cannot parse {raw!r} as {tag}") from None
    raise ConfigError(f"{path}: unknown type tag {tag}")


def _render_value(tag: str, value: Any) -> str:
    if value is None:
        return ""
    if tag == "bool":
        return "true" if value else "false"
    if tag in ("float", "optfloat"):
        return repr(float(value))
    if tag == "floatlist":
        return " ".join(repr(float(v)) for v in value)
    if tag == "intlist":
        return " ".join(str(v) for v in value)
    return str(value)


def default_config() -> dict[str, dict[str, Any]]:
    return {sec: {key: spec[1] for key, spec in keys.items()} for sec, keys in SCHEMA.items()}


def load_config(path: str | None) -> dict[str, dict[str, Any]]:
    """Defaults overlaid with the file at path; unknown keys rejected."""
    config = default_config()
    if path is None:
        return config
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file: {exc}") from None
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section: {section}")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown config key: {section}.{key}")
            config[section][key] = _parse_value(SCHEMA[section][key][0], raw, f"{section}.{key}")
    return config


def render_config(config: dict[str, dict[str, Any]]) -> str:
    """Config as sectioned key-value text; load_config inverts it."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (tag, _) in keys.items():
            lines.append(f"{key} = {_render_value(tag, config[section][key])}")
        lines.append("")
    return "\n".join(lines)
