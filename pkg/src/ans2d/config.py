"""Flat key-value run configuration.

Text format: one `section.key = value` per line, `#` starts a comment,
blank lines ignored.  Unknown keys and malformed values are errors; every
key has a default, and echoing a configuration always writes the complete
key set in schema order so a run's effective configuration round-trips.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from .errors import ConfigError


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_levels(text: str) -> tuple[int, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty level list")
    return tuple(int(p) for p in parts)


def _fmt_levels(value: tuple[int, ...]) -> str:
    return ",".join(str(v) for v in value)


def _fmt_default(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class _Key:
    name: str
    parse: Callable[[str], Any]
    default: Any
    fmt: Callable[[Any], str] = _fmt_default
    choices: tuple[str, ...] | None = None


def _str_key(name: str, default: str, choices: tuple[str, ...] | None = None) -> _Key:
    return _Key(name, lambda s: s.strip(), default, choices=choices)


SCHEMA: tuple[_Key, ...] = (
    _Key("grid.n1", int, 32),
    _Key("grid.n2", int, 32),
    _str_key("init.kind", "taylor-green",
             ("taylor-green", "shear-x1", "shear-x2", "random", "zero")),
    _Key("init.amplitude", float, 1.0),
    _Key("init.band", int, 3),
    _Key("init.seed", int, 0),
    _Key("det.dt", float, 1e-3),
    _Key("det.t_end", float, 1.0),
    _str_key("det.integrator", "if-rk2", ("if-rk2", "if-rk4", "if-euler")),
    _Key("det.eps_v", float, 0.0),
    _Key("det.snapshot_every", int, 0),
    _Key("sde.dt", float, 1e-3),
    _Key("sde.t_end", float, 1.0),
    _Key("sde.galerkin_n", int, 8),
    _Key("sde.seed", int, 0),
    _str_key("sde.scheme", "em-if", ("em-if",)),
    _Key("sde.drop_nonlinearity", _parse_bool, False),
    _Key("sde.alpha_tilde", float, 0.5),
    _Key("sde.snapshot_every", int, 0),
    _str_key("noise.c_recipes", ""),
    _str_key("noise.b_recipes", ""),
    _str_key("noise.g", "one", ("one", "zero", "tanh", "sin")),
    _Key("noise.eta", float, 0.1),
    _Key("noise.budget_margin", float, 1.0),
    _Key("ensemble.n_paths", int, 100),
    _Key("ensemble.base_seed", int, 0),
    _Key("ensemble.levels", _parse_levels, (8, 16, 32), fmt=_fmt_levels),
    _Key("ensemble.batch", int, 500),
    _str_key("uniqueness.kind", "det", ("det", "sde")),
    _Key("uniqueness.perturbation", float, 1e-8),
    _str_key("uniqueness.pert_mode", "1,0"),
    _Key("uniqueness.tol", float, 0.05),
    _Key("verify.n_fields", int, 100),
    _Key("verify.band", int, 5),
    _Key("verify.seed", int, 0),
    _str_key("plot.input", ""),
)

_BY_NAME = {k.name: k for k in SCHEMA}


def default_config() -> dict[str, Any]:
    return {k.name: k.default for k in SCHEMA}


def parse_config(text: str) -> dict[str, Any]:
    """Parse configuration text on top of the defaults."""
    cfg = default_config()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        name, value = (part.strip() for part in line.split("=", 1))
        key = _BY_NAME.get(name)
        if key is None:
            raise ConfigError(f"line {lineno}: unknown key {name!r}")
        try:
            parsed = key.parse(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {name}: {exc}") from exc
        if key.choices is not None and parsed not in key.choices:
            raise ConfigError(
                f"line {lineno}: {name} must be one of {key.choices}, got {parsed!r}")
        cfg[name] = parsed
    return cfg


def load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return default_config()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def echo_config(cfg: dict[str, Any]) -> str:
    """Canonical full-key text form; parse(echo(cfg)) reproduces cfg."""
    lines = ["# effective configuration (all keys)"]
    for key in SCHEMA:
        lines.append(f"{key.name} = {key.fmt(cfg[key.name])}")
    return "\n".join(lines) + "\n"
