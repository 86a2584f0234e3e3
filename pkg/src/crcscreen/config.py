"""Flat ``key=value`` configuration files.

One assignment per line, ``#`` comments and blank lines ignored, dotted
keys for grouping (``forest.trees=100``).  Values stay strings here;
consumers parse them with their own typed constructors.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Malformed configuration text or an unreadable config file."""


def parse_config(text: str) -> dict[str, str]:
    """Parse config text into an ordered ``{key: value}`` mapping."""
    items: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in items:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        items[key] = value.strip()
    return items


def read_config(path) -> dict[str, str]:
    """Read and parse one config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def parse_bool(key: str, value: str) -> bool:
    """Parse a ``true``/``false`` config value."""
    lowered = value.strip().lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    raise ConfigError(f"{key} must be 'true' or 'false', got {value!r}")
