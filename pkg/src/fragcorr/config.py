"""Run configuration: JSON file plus command-line overrides."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError, ParameterDomainError
from .model import SystemParams

# Nested sections accepted in config files; each maps onto flat fields.
SECTIONS = {
    "physics": ("m", "hbar", "kappa", "omega", "a", "delta_p", "p0", "volume"),
    "time": ("t_max", "samples"),
    "oracle": ("n", "extent", "dt", "box_L", "box_n", "tolerances"),
    "sweep": ("kappas", "a_values"),
    "output": ("format", "path"),
}


@dataclass
class RunConfig:
    m: float = 1.0
    hbar: float = 1.0
    kappa: Optional[float] = None
    omega: Optional[float] = None
    a: Optional[float] = None
    delta_p: Optional[float] = None
    p0: float = 1.0
    volume: float = 1.0
    t_max: float = 10.0
    samples: int = 101
    n: Optional[int] = None
    extent: Optional[float] = None
    dt: Optional[float] = None
    box_L: float = 40.0
    box_n: int = 1024
    tolerances: dict = field(default_factory=dict)
    kappas: list = field(default_factory=list)
    a_values: list = field(default_factory=list)
    format: str = "csv"
    path: Optional[str] = None

    def validate(self) -> "RunConfig":
        if self.kappa is not None and self.omega is not None:
            raise ConfigError("give exactly one of kappa and omega")
        if self.a is not None and self.delta_p is not None:
            raise ConfigError("give exactly one of a and delta_p")
        if self.kappa is None and self.omega is None:
            self.kappa = 1.0
        if self.a is None and self.delta_p is None:
            self.a = 1.0
        if not self.samples >= 2:
            raise ConfigError("samples must be at least 2")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ConfigError("t_max must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.format!r}")
        if not self.volume > 0:
            raise ConfigError("volume must be positive")
        try:
            self.params()
        except ParameterDomainError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def width(self) -> float:
        if self.a is not None:
            return float(self.a)
        if not self.delta_p or self.delta_p <= 0:
            raise ConfigError("delta_p must be positive")
        # dP = hbar / a for the minimum-uncertainty state.
        return self.hbar / self.delta_p

    def params(self, kappa: Optional[float] = None, a: Optional[float] = None) -> SystemParams:
        a = self.width() if a is None else a
        if kappa is not None:
            return SystemParams(m=self.m, hbar=self.hbar, kappa=float(kappa), a=float(a))
        if self.omega is not None:
            return SystemParams.from_omega(self.m, self.hbar, float(self.omega), float(a))
        return SystemParams(m=self.m, hbar=self.hbar, kappa=float(self.kappa), a=float(a))

    def to_dict(self) -> dict:
        flat = asdict(self)
        return {section: {k: flat[k] for k in keys} for section, keys in SECTIONS.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        flat: dict[str, Any] = {}
        names = {f.name for f in fields(cls)}
        for key, value in data.items():
            if key in SECTIONS and isinstance(value, dict):
                for k, v in value.items():
                    if k not in SECTIONS[key]:
                        raise ConfigError(f"unknown key {key}.{k}")
                    flat[k] = v
            elif key in names:
                flat[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
        return cls(**flat)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)
