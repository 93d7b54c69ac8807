"""Run configuration: defaults, a flat ``key=value`` file form, and validation."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields

from .codec import VARIANTS
from .dictionary import THRESHOLD_MODES

CONFIG_ENV = "EQISA_CONFIG"
LOWERING_MODES = ("per-gate", "unitary")
CODEBOOK_MODES = ("per-circuit", "trained")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    sk_depth: int = 5
    sk_recursion: int = 4
    simplify: bool = True
    ensemble_size: int = 200
    seed: int = 0
    variant: str = "v3"
    threshold_mode: str = "mean"
    top_k: int = 14
    threshold_value: float = 0.0
    lowering: str = "per-gate"
    codebook_mode: str = "per-circuit"
    energy_pj_per_bit: float = 2.46
    post_lossless: bool = False
    workers: int = 1
    model_dir: str = ""
    basis_path: str = ""

    def validate(self) -> "RunConfig":
        if not 0 <= self.sk_depth <= 8:
            raise ConfigError(f"sk_depth must be in 0..8, got {self.sk_depth}")
        if not 0 <= self.sk_recursion <= 6:
            raise ConfigError(f"sk_recursion must be in 0..6, got {self.sk_recursion}")
        if self.ensemble_size < 1:
            raise ConfigError("ensemble_size must be >= 1")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ConfigError(f"threshold_mode must be one of {THRESHOLD_MODES}")
        if self.top_k < 4:
            raise ConfigError("top_k must be >= 4 (CX and the base gates are always selected)")
        if self.threshold_value < 0:
            raise ConfigError("threshold_value must be nonnegative")
        if self.lowering not in LOWERING_MODES:
            raise ConfigError(f"lowering must be one of {LOWERING_MODES}")
        if self.codebook_mode not in CODEBOOK_MODES:
            raise ConfigError(f"codebook_mode must be one of {CODEBOOK_MODES}")
        if self.energy_pj_per_bit < 0:
            raise ConfigError("energy_pj_per_bit must be nonnegative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def to_text(self) -> str:
        lines = ["# eqisa run configuration"]
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name}={str(v).lower() if isinstance(v, bool) else v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, base: "RunConfig | None" = None) -> "RunConfig":
        cfg = dataclasses.replace(base) if base else cls()
        types = {f.name: f.type for f in fields(cls)}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip().replace("-", "_"), value.strip()
            if not sep or key not in types:
                raise ConfigError(f"line {lineno}: unknown setting {line!r}")
            setattr(cfg, key, _coerce(key, types[key], value))
        return cfg

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def _coerce(key: str, typ, value: str):
    typ = typ if isinstance(typ, str) else typ.__name__
    try:
        if typ == "bool":
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if typ == "int":
            return int(value)
        if typ == "float":
            return float(value)
        return value
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot read {value!r} as {typ}") from exc


def load_config(path: str | None = None) -> RunConfig:
    """Defaults, overlaid by ``path`` or else the file named by ``$EQISA_CONFIG``."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            return RunConfig.from_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
