"""Flat key-value run configuration.

Configs are text files of ``key = value`` lines with ``#`` comments and
dotted section prefixes (``noise.sigma = 0.1``).  Every key can be overridden
on the command line as ``--key=value``.  Unknown keys are rejected by name so
a typo cannot silently fall back to a default.
"""

from __future__ import annotations

from .exceptions import ConfigError


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional(parser):
    def parse(text: str):
        if text.strip().lower() in ("", "none", "auto"):
            return None
        return parser(text)

    return parse


# key -> (parser, default); None defaults mean "derived or required per command"
KEYS = {
    "seed": (int, 0),
    "strict": (_parse_bool, False),
    "io.outdir": (str, None),
    "io.input": (str, None),
    "io.output": (str, None),
    "io.sparse": (str, None),
    "io.modes": (str, None),
    "io.modes_csv": (str, None),
    "io.denoised": (str, None),
    "io.truth": (str, None),
    "io.estimate": (str, None),
    "io.amps_csv": (str, None),
    "synth.n1": (int, 16),
    "synth.n2": (int, 16),
    "synth.m": (int, 32),
    "synth.pairs": (int, 3),
    "synth.real_modes": (int, 0),
    "synth.range_lo": (float, -0.5),
    "synth.range_hi": (float, 0.5),
    "noise.sigma": (float, 0.1),
    "noise.ps": (float, 0.1),
    "noise.kind": (str, "salt-pepper"),
    "alpha": (float, 0.91),
    "w": (float, 0.5),
    "mu": (float, 0.01),
    "eps": (_parse_optional(float), None),
    "eta": (_parse_optional(float), None),
    "rank.r": (_parse_optional(int), None),
    "rank.energy": (float, 0.999),
    "tol": (float, 1e-4),
    "max_iter": (int, 20_000),
    "trials.k": (int, 1),
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines into raw string values."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        raw[key] = value
    return raw


def resolve(file_values: dict, overrides: dict) -> dict:
    """Typed config from defaults, file values, and command-line overrides."""
    merged = dict(file_values)
    merged.update(overrides)
    config = {key: default for key, (_, default) in KEYS.items()}
    for key, text in merged.items():
        if key not in KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
        parser, _ = KEYS[key]
        try:
            config[key] = parser(text)
        except (ValueError, TypeError) as err:
            raise ConfigError(f"bad value for {key!r}: {text!r} ({err})") from err
    return config


def load_config(path: str | None, overrides: dict) -> dict:
    file_values = {}
    if path is not None:
        try:
            with open(path) as fh:
                file_values = parse_config_text(fh.read(), source=path)
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
    return resolve(file_values, overrides)


def require(config: dict, key: str, command: str):
    value = config.get(key)
    if value is None:
        raise ConfigError(f"command {command!r} requires {key!r}")
    return value
