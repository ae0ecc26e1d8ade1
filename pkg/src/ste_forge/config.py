"""Generation config files: TOML documents whose keys mirror GenConfig."""

from __future__ import annotations

import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on older interpreters
    import tomli as tomllib

from .data_model import GenConfig
from .errors import ConfigError

_PATH_KEYS = ("font_dir", "background_dir", "lexicon")
_PAIR_KEYS = ("canvas", "opacity_range")
_SCALAR_KEYS = ("rotation_range", "curve_probability", "blur_probability", "master_seed")
_KNOWN_KEYS = set(_PATH_KEYS) | set(_PAIR_KEYS) | set(_SCALAR_KEYS)


def load_gen_config(path: Path | str) -> GenConfig:
    """Parse a config file into a GenConfig.

    Unknown keys are rejected rather than ignored: a typo like
    `blur_probablity` silently reverting to the default would change a
    dataset without anyone noticing.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")

    fields: dict = {}
    for key in _PATH_KEYS:
        if key in raw:
            if not isinstance(raw[key], str):
                raise ConfigError(f"{path}: {key} must be a string path")
            fields[key] = Path(raw[key])
    for key in _PAIR_KEYS:
        if key in raw:
            value = raw[key]
            if not (isinstance(value, list) and len(value) == 2):
                raise ConfigError(f"{path}: {key} must be a 2-element array")
            fields[key] = (value[0], value[1])
    for key in _SCALAR_KEYS:
        if key in raw:
            fields[key] = raw[key]

    try:
        return GenConfig(**fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
