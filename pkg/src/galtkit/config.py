"""Detector configuration files.

INI-style, one ``[galt]`` section, keys named after the ``GaltConfig``
fields (``K_fix_s`` is accepted in any case)::

    [galt]
    v_hand_thresh = 0.05
    K_fix_s = 0.080

Missing keys keep their defaults.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from pathlib import Path

from galtkit.detector import GaltConfig

CONFIG_ENV = "GALT_CONFIG"
SECTION = "galt"

# spelling used when writing files; parsing is case-insensitive
_DISPLAY_NAMES = {"k_fix_s": "K_fix_s"}


class ConfigError(ValueError):
    pass


def parse_config(text: str, source: str = "<string>") -> GaltConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigError(f"{source}: {e}") from e
    extra = [s for s in parser.sections() if s != SECTION]
    if extra:
        raise ConfigError(f"{source}: unknown sections {extra}")
    if not parser.has_section(SECTION):
        return GaltConfig()
    fields = {f.name for f in dataclasses.fields(GaltConfig)}
    values = {}
    for key, raw in parser.items(SECTION):
        if key not in fields:
            raise ConfigError(f"{source}: unknown key {key!r} in [{SECTION}]")
        try:
            values[key] = float(raw)
        except ValueError as e:
            raise ConfigError(f"{source}: {key} = {raw!r} is not a number") from e
    try:
        return GaltConfig(**values)
    except ValueError as e:
        raise ConfigError(f"{source}: {e}") from e


def load_config(path: str | Path | None = None) -> GaltConfig:
    """Read ``path``, else the file named by $GALT_CONFIG, else defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    if path is None:
        return GaltConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text, str(path))


def dump_config(cfg: GaltConfig) -> str:
    lines = [f"[{SECTION}]"]
    for f in dataclasses.fields(cfg):
        lines.append(f"{_DISPLAY_NAMES.get(f.name, f.name)} = {getattr(cfg, f.name)!r}")
    return "\n".join(lines) + "\n"
