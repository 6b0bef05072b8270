"""Run configuration and its flat ``key = value`` text form.

Keys are dotted paths into :class:`RunConfig`, e.g. ``pretrain.tau`` or
``label_fraction``. Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field, fields, replace
from typing import Any

from ..augment import AugmentationConfig
from ..classifier import SelfTrainConfig
from ..contrastive import PretrainConfig
from ..encoder import EncoderConfig

__all__ = ["ConfigError", "RunConfig", "config_keys", "parse_config", "load_config", "apply_overrides"]


class ConfigError(ValueError):
    pass


_OPTIONAL = {"augment.fixed_k"}  # None selects k at random in [k_min, k_max]


@dataclass(frozen=True)
class RunConfig:
    augment: AugmentationConfig = field(default_factory=AugmentationConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    pretrain: PretrainConfig = field(default_factory=PretrainConfig)
    selftrain: SelfTrainConfig = field(default_factory=SelfTrainConfig)
    train_fraction: float = 0.6
    test_fraction: float = 0.2
    validation_fraction: float = 0.2
    label_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_fraction, self.test_fraction, self.validation_fraction)
        if min(fracs) < 0 or abs(sum(fracs) - 1.0) > 1e-9:
            raise ConfigError("split fractions must be non-negative and sum to 1")
        if not 0.0 < self.label_fraction <= 1.0:
            raise ConfigError("label_fraction must lie in (0, 1]")

    def items(self) -> list[tuple[str, Any]]:
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            if dataclasses.is_dataclass(value):
                out += [(f"{f.name}.{g.name}", getattr(value, g.name)) for g in fields(value)]
            else:
                out.append((f.name, value))
        return out

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.items())

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def _field_types() -> dict[str, type]:
    types: dict[str, type] = {}
    defaults = RunConfig()
    for key, value in defaults.items():
        types[key] = type(value)
    return types


def config_keys() -> list[str]:
    return [k for k, _ in RunConfig().items()]


def _coerce(key: str, text: str, kind: type):
    if text.lower() == "none" and key in _OPTIONAL:
        return None
    try:
        if kind is bool:
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text, 0)
        return kind(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {text!r} as {kind.__name__}") from None


def apply_overrides(cfg: RunConfig, values: dict[str, str]) -> RunConfig:
    """Return ``cfg`` with the given dotted keys replaced (values as text)."""
    types = _field_types()
    top: dict[str, Any] = {}
    nested: dict[str, dict[str, Any]] = {}
    for key, text in values.items():
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        value = _coerce(key, str(text).strip(), types[key])
        if "." in key:
            section, name = key.split(".", 1)
            nested.setdefault(section, {})[name] = value
        else:
            top[key] = value
    try:
        for section, changes in nested.items():
            top[section] = replace(getattr(cfg, section), **changes)
        return replace(cfg, **top)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str) -> RunConfig:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return apply_overrides(RunConfig(), values)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
