"""Flat typed INI configs, one section per stage.

Precedence is command-line ``--set section.key=value`` over the file over
built-in defaults.  Values are coerced to the type of the dataclass default.
"""
from __future__ import annotations

import configparser
import dataclasses
from pathlib import Path

from .errors import ConfigError

TRUE = {"1", "true", "yes", "on"}
FALSE = {"0", "false", "no", "off"}


def read_config(path) -> dict[str, dict[str, str]]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    cp.optionxform = str
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return {s: dict(cp[s]) for s in cp.sections()}


def apply_overrides(sections: dict[str, dict[str, str]], overrides) -> dict[str, dict[str, str]]:
    """Merge ``section.key=value`` strings into ``sections`` (copied).

    The section is the text before the first dot, or the first two parts for
    ``region.NAME.key``; keys may contain dots (``synth.mixing.member``).
    """
    out = {s: dict(v) for s, v in sections.items()}
    for item in overrides or []:
        key, sep, value = item.partition("=")
        parts = key.strip().split(".")
        cut = 2 if parts[0] == "region" else 1
        section, name = ".".join(parts[:cut]), ".".join(parts[cut:])
        if not sep or not section or not name or "" in parts:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        out.setdefault(section, {})[name] = value.strip()
    return out


def coerce(text: str, like, key: str = "value"):
    """Parse ``text`` as the type of ``like`` (bool, int, float or str)."""
    t = str(text).strip()
    try:
        if isinstance(like, bool):
            if t.lower() in TRUE:
                return True
            if t.lower() in FALSE:
                return False
            raise ValueError
        if isinstance(like, int):
            return int(t)
        if isinstance(like, float) or like is None:
            if like is None and t.lower() in ("", "none"):
                return None
            return float(t)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {t!r} as {type(like).__name__}") from None
    return t


def build(cls, values: dict[str, str] | None = None, section: str = "", **fixed):
    """Instantiate dataclass ``cls`` from string ``values`` over its defaults."""
    obj = cls(**fixed)
    known = {f.name for f in dataclasses.fields(cls)}
    changes = {}
    for key, text in (values or {}).items():
        if key not in known:
            raise ConfigError(f"[{section}] unknown key {key!r}; known: {', '.join(sorted(known))}")
        changes[key] = coerce(text, getattr(obj, key), f"{section}.{key}")
    return dataclasses.replace(obj, **changes)


def csv_list(text: str | None, default: list[str]) -> list[str]:
    if text is None:
        return list(default)
    return [t.strip() for t in text.split(",") if t.strip()]


def synth_config(sections: dict[str, dict[str, str]]):
    """SynthConfig from ``[synth]`` plus optional ``[region.NAME]`` sections."""
    from . import synth

    sec = dict(sections.get("synth", {}))
    preset = sec.pop("preset", None)
    seed = int(coerce(sec.pop("seed", "42"), 0, "synth.seed"))
    if preset is not None:
        if preset not in synth.PRESETS:
            raise ConfigError(f"unknown synth preset {preset!r}; available: {', '.join(synth.PRESETS)}")
        cfg = synth.PRESETS[preset](seed)
    else:
        cfg = synth.SynthConfig(regions=[], seed=seed)
    regions = [s for s in sections if s.startswith("region.")]
    if regions:
        cfg.regions = []
        for s in regions:
            vals = dict(sections[s])
            parties = csv_list(vals.pop("parties", None), [])
            colors = csv_list(vals.pop("colors", None), [])
            if colors and len(colors) != len(parties):
                raise ConfigError(f"[{s}] colors must match parties")
            cfg.regions.append(build(synth.RegionSpec, vals, s, name=s.split(".", 1)[1],
                                     parties=parties, colors=colors))
    for key, text in sec.items():
        head, _, sub = key.partition(".")
        if head in ("mixing", "activity_scale") and sub:
            getattr(cfg, head)[sub] = coerce(text, 0.0, f"synth.{key}")
        elif head in ("retweets_per_user", "activity_sigma", "hub_bias", "interacting_mixing"):
            setattr(cfg, head, coerce(text, getattr(cfg, head), f"synth.{key}"))
        else:
            raise ConfigError(f"[synth] unknown key {key!r}")
    return cfg.validate()
