"""Scenario configuration: flat ``key = value`` text with an optional ``[scenario]`` header.

Example::

    [scenario]
    preset = damped-squeezed
    sigma = 0.5
    gamma = 0.1
    n = 0
    q0 = -1.0, 0.5, 1.5
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass

from .errors import ConfigError

PRESETS = ("static", "static-squeezed", "damped", "damped-squeezed", "custom")
SECTION = "scenario"
RTOL_ENV = "PILOTWAVE_RTOL"

_FLOAT_KEYS = ("m", "omega0", "gamma", "a", "nu", "b", "mu", "sigma", "theta_u", "theta_v",
               "omegaI", "alpha", "t0", "t_max", "dt_out", "rtol")
_DEFAULT_SIGMA = 0.5
_DEFAULT_GAMMA = 0.1


@dataclass(frozen=True)
class ScenarioConfig:
    preset: str
    m: float = 1.0
    omega0: float = 1.0
    gamma: float = 0.0
    a: float = 0.0
    nu: float = 0.0
    b: float = 0.0
    mu: float = 0.0
    sigma: float = 0.0
    theta_u: float = 0.0
    theta_v: float = 0.0
    omegaI: float | None = None
    n: int | None = None
    alpha: float | None = None
    q0: tuple = (-1.0, 0.5, 1.5)
    t0: float = 0.0
    t_max: float = 20.0
    dt_out: float = 0.05
    rtol: float = 1e-10
    out_dir: str = "out"
    emit_plot_script: bool = False

    @property
    def squeezed(self) -> bool:
        return self.sigma > 0.0 or self.theta_u != 0.0 or self.theta_v != 0.0


KEYS = tuple(f.name for f in dataclasses.fields(ScenarioConfig))


def default_rtol() -> float:
    raw = os.environ.get(RTOL_ENV)
    if raw is None:
        return 1e-10
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{RTOL_ENV}={raw!r} is not a number", key="rtol") from None


def read_pairs(text: str) -> dict:
    """Raw ``key -> (value, line)`` pairs; syntax errors carry line numbers."""
    pairs: dict = {}
    seen_section = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip() != SECTION:
                raise ConfigError(f"unknown section {line!r}; only [{SECTION}] is allowed", line=lineno)
            if seen_section or pairs:
                raise ConfigError(f"[{SECTION}] must appear once, before any key", line=lineno)
            seen_section = True
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        if key in pairs:
            first = pairs[key][1]
            raise ConfigError(f"duplicate key {key!r} (first set on line {first}, again on line {lineno})",
                              line=lineno, key=key)
        pairs[key] = (value, lineno)
    return pairs


def _convert(key, value, line):
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key == "n":
            return int(value)
        if key == "q0":
            items = [s.strip() for s in value.split(",") if s.strip()]
            return tuple(float(s) for s in items)
        if key == "emit_plot_script":
            lowered = value.lower()
            if lowered in ("true", "yes", "1"):
                return True
            if lowered in ("false", "no", "0"):
                return False
            raise ValueError(value)
    except ValueError:
        raise ConfigError(f"invalid value {value!r} for {key!r}", line=line, key=key) from None
    return value


def config_from_pairs(pairs: dict) -> ScenarioConfig:
    """Apply defaults and validate; ``pairs`` maps key to ``(raw_value, line)``."""
    values = {key: _convert(key, raw, line) for key, (raw, line) in pairs.items()}
    lines = {key: line for key, (_, line) in pairs.items()}

    def fail(key, message):
        raise ConfigError(message, line=lines.get(key), key=key)

    if "preset" not in values:
        raise ConfigError("missing required key 'preset'", key="preset")
    preset = values["preset"]
    if preset not in PRESETS:
        fail("preset", f"preset must be one of {', '.join(PRESETS)}, got {preset!r}")
    for key, value in values.items():
        if isinstance(value, float) and not math.isfinite(value):
            fail(key, f"{key} must be finite")
    if "q0" in values and not all(math.isfinite(x) for x in values["q0"]):
        fail("q0", "q0 entries must be finite")

    squeezed_preset = preset.endswith("-squeezed")
    damped_preset = preset.startswith("damped")
    values.setdefault("sigma", _DEFAULT_SIGMA if squeezed_preset else 0.0)
    values.setdefault("gamma", _DEFAULT_GAMMA if damped_preset else 0.0)
    values.setdefault("rtol", default_rtol())
    if "n" in values and "alpha" in values:
        fail("alpha", "give either n or alpha, not both")
    if "n" not in values and "alpha" not in values:
        values["n"] = 0

    cfg = ScenarioConfig(**values)

    if cfg.m <= 0:
        fail("m", "m must be positive")
    if cfg.omega0 <= 0:
        fail("omega0", "omega0 must be positive")
    if cfg.gamma < 0:
        fail("gamma", "gamma must be non-negative")
    if damped_preset and not cfg.omega0 > cfg.gamma:
        fail("gamma", f"damped presets need omega0 > gamma (underdamped), got gamma={cfg.gamma}")
    if preset.startswith("static") and cfg.gamma != 0.0:
        fail("gamma", "static presets have no damping; use a damped preset")
    if preset in ("static", "damped") and cfg.squeezed:
        fail("sigma", f"preset {preset!r} is unsqueezed; use {preset}-squeezed")
    if cfg.sigma < 0:
        fail("sigma", "sigma must be non-negative")
    if preset != "custom":
        for key in ("a", "nu", "b", "mu"):
            if getattr(cfg, key) != 0.0:
                fail(key, f"{key} only applies to the custom preset")
    if abs(cfg.a) >= 1.0:
        fail("a", "|a| must be < 1 so that M(t) > 0")
    if abs(cfg.b) > 1.0:
        fail("b", "|b| must be <= 1 so that omega(t) >= 0")
    if cfg.omegaI is not None and cfg.omegaI <= 0:
        fail("omegaI", "omegaI must be positive")
    if cfg.n is not None and cfg.n < 0:
        fail("n", "n must be non-negative")
    if not cfg.q0:
        fail("q0", "q0 must list at least one initial position")
    if not cfg.t_max > cfg.t0:
        fail("t_max", "t_max must exceed t0")
    if not cfg.dt_out > 0:
        fail("dt_out", "dt_out must be positive")
    if not 1e-12 <= cfg.rtol <= 1e-6:
        fail("rtol", "rtol must lie in [1e-12, 1e-6]")
    return cfg


def parse_config(text: str) -> ScenarioConfig:
    return config_from_pairs(read_pairs(text))


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(x)) for x in value)
    return str(value)


def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; ``parse_config(serialize_config(c)) == c``."""
    lines = [f"[{SECTION}]"]
    for key in KEYS:
        value = getattr(cfg, key)
        if value is None:
            continue
        lines.append(f"{key} = {_format(value)}")
    return "\n".join(lines) + "\n"
