"""Simulation configuration: defaults, validation and strict JSON loading."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .policy import ProtocolKind, ProtocolParams


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class WorldParams:
    l0: int = 1
    deposits_per_growth: int = 80
    growth: bool = True


@dataclass(frozen=True)
class EngineParams:
    horizon: int = 10_800
    p_pass: float = 0.2
    p_pass_jam: float = 0.03
    t_dig: int = 8
    t_dump: int = 28


@dataclass(frozen=True)
class NoiseParams:
    sigma0: float = 0.1
    sigma_c: float = 0.3


@dataclass(frozen=True)
class SimConfig:
    robots: int = 4
    seed: int = 0
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    world: WorldParams = field(default_factory=WorldParams)
    engine: EngineParams = field(default_factory=EngineParams)
    noise: NoiseParams = field(default_factory=NoiseParams)

    def with_protocol(self, kind: ProtocolKind | str, **changes: Any) -> SimConfig:
        proto = dataclasses.replace(self.protocol, kind=ProtocolKind(kind), **changes)
        return dataclasses.replace(self, protocol=proto)

    def replace(self, section: str | None = None, **changes: Any) -> SimConfig:
        """Copy with top-level fields or fields of one section replaced."""
        if section is None:
            return dataclasses.replace(self, **changes)
        sub = dataclasses.replace(getattr(self, section), **changes)
        return dataclasses.replace(self, **{section: sub})


_SECTIONS = {
    "protocol": ProtocolParams,
    "world": WorldParams,
    "engine": EngineParams,
    "noise": NoiseParams,
}


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ConfigError(name, f"probability must lie in [0, 1], got {value}")


def validate(config: SimConfig) -> SimConfig:
    """Return ``config`` unchanged or raise :class:`ConfigError`."""
    p, w, e, n = config.protocol, config.world, config.engine, config.noise
    if config.robots < 1:
        raise ConfigError("robots", f"need at least one robot, got {config.robots}")
    if w.l0 < 1:
        raise ConfigError("world.l0", f"initial length must be >= 1, got {w.l0}")
    if w.deposits_per_growth < 1:
        raise ConfigError("world.deposits_per_growth", "must be >= 1")
    if e.horizon < 0:
        raise ConfigError("engine.horizon", f"must be >= 0, got {e.horizon}")
    if e.t_dig < 1:
        raise ConfigError("engine.t_dig", "must be >= 1")
    if e.t_dump < 1:
        raise ConfigError("engine.t_dump", "must be >= 1")
    _check_prob("engine.p_pass", e.p_pass)
    _check_prob("engine.p_pass_jam", e.p_pass_jam)
    _check_prob("protocol.alpha", p.alpha)
    _check_prob("protocol.fixed_reversal", p.fixed_reversal)
    if not 0.0 < p.gamma <= 1.0:
        raise ConfigError("protocol.gamma", f"learning rate must lie in (0, 1], got {p.gamma}")
    if p.eta < 0:
        raise ConfigError("protocol.eta", "must be >= 0")
    if p.xi < 0:
        raise ConfigError("protocol.xi", "must be >= 0")
    if p.t_rest < 1:
        raise ConfigError("protocol.t_rest", "must be a positive number of ticks")
    if p.kind is ProtocolKind.ADAPTIVE:
        if not 0.0 < p.rev_exponent < 1.0:
            raise ConfigError("protocol.rev_exponent", "must lie in (0, 1) for the adaptive protocol")
        if not p.ent_exponent > 1.0:
            raise ConfigError("protocol.ent_exponent", "must be > 1 for the adaptive protocol")
    if n.sigma0 < 0:
        raise ConfigError("noise.sigma0", "must be >= 0")
    if n.sigma_c < 0:
        raise ConfigError("noise.sigma_c", "must be >= 0")
    return config


def _coerce(cls: type, name: str, raw: Any, target: str) -> Any:
    if target == "bool":
        if not isinstance(raw, bool):
            raise ConfigError(name, f"expected a boolean, got {raw!r}")
        return raw
    if target == "int":
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(name, f"expected an integer, got {raw!r}")
        return raw
    if target == "float":
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(name, f"expected a number, got {raw!r}")
        return float(raw)
    if target == "ProtocolKind":
        try:
            return ProtocolKind(raw)
        except ValueError:
            choices = ", ".join(k.value for k in ProtocolKind)
            raise ConfigError(name, f"unknown protocol {raw!r} (choose from {choices})") from None
    raise TypeError(f"unsupported field type {target} on {cls.__name__}")


def _build(cls: type, data: Any, prefix: str) -> Any:
    if not isinstance(data, dict):
        raise ConfigError(prefix or "<root>", "expected a JSON object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{prefix}{unknown[0]}", "unknown key")
    kwargs = {}
    for key, raw in data.items():
        name = f"{prefix}{key}"
        if key in _SECTIONS and cls is SimConfig:
            kwargs[key] = _build(_SECTIONS[key], raw, f"{name}.")
        else:
            kwargs[key] = _coerce(cls, name, raw, str(fields[key].type))
    return cls(**kwargs)


def config_from_dict(data: dict) -> SimConfig:
    return validate(_build(SimConfig, data, ""))


def config_to_dict(config: SimConfig) -> dict:
    out = dataclasses.asdict(config)
    out["protocol"]["kind"] = config.protocol.kind.value
    return out


def parse_config(path: str | Path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(str(path), "config file not found") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"malformed JSON ({exc})") from None
    return config_from_dict(data)
