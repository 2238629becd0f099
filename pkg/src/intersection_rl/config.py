"""Experiment configuration: flat `key = value` files with strict validation.

Unknown keys are rejected; every diagnostic names the offending key. An empty
file yields the documented defaults.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

from .dqn.trainer import TrainConfig
from .errors import ConfigError
from .nn.networks import MODEL_KINDS, AttentionConfig
from .sim.env import EnvConfig
from .sim.road import MOVEMENTS


def _parse_bool(raw: str, key: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_seeds(raw: str, key: str) -> tuple[int, ...]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{key}: seed list must not be empty")
    return tuple(_parse_int(p, key) for p in parts)


# key -> (parser, default, validator or None)
_SCHEMA: dict = {
    "env.vehicles_min": (_parse_int, 3, lambda v: v >= 0 or "must be >= 0"),
    "env.vehicles_max": (_parse_int, 12, lambda v: v >= 0 or "must be >= 0"),
    "env.ego_priority": (_parse_bool, False, None),
    "env.ego_destination": (
        lambda raw, key: raw,
        "left",
        lambda v: v in MOVEMENTS or f"must be one of {MOVEMENTS}",
    ),
    "env.seeds": (_parse_seeds, (0, 1, 2), None),
    "agent.kind": (
        lambda raw, key: raw,
        "ego_attention",
        lambda v: v in MODEL_KINDS or f"must be one of {MODEL_KINDS}",
    ),
    "agent.attention_heads": (_parse_int, 2, lambda v: v >= 1 or "must be >= 1"),
    "agent.attention_dk": (_parse_int, 32, lambda v: v >= 1 or "must be >= 1"),
    "agent.attention_layers": (_parse_int, 1, lambda v: v >= 1 or "must be >= 1"),
    "agent.attention_embed": (_parse_int, 64, lambda v: v >= 1 or "must be >= 1"),
    "training.gamma": (_parse_float, 0.95, lambda v: 0.0 <= v < 1.0 or "must be in [0, 1)"),
    "training.learning_rate": (_parse_float, 5e-4, lambda v: v > 0 or "must be positive"),
    "training.batch_size": (_parse_int, 64, lambda v: v >= 1 or "must be >= 1"),
    "training.target_sync": (_parse_int, 50, lambda v: v >= 1 or "must be >= 1"),
    "training.epsilon_start": (_parse_float, 1.0, lambda v: 0.0 <= v <= 1.0 or "must be in [0, 1]"),
    "training.epsilon_end": (_parse_float, 0.05, lambda v: 0.0 <= v <= 1.0 or "must be in [0, 1]"),
    "training.epsilon_decay_steps": (_parse_int, 10_000, lambda v: v >= 1 or "must be >= 1"),
    "training.episodes": (_parse_int, 1000, lambda v: v >= 0 or "must be >= 0"),
    "training.replay_capacity": (_parse_int, 15_000, lambda v: v >= 1 or "must be >= 1"),
    "output.dir": (lambda raw, key: raw, "runs", None),
}


@dataclass(frozen=True)
class ExperimentConfig:
    values: dict

    @property
    def seeds(self) -> tuple[int, ...]:
        return self.values["env.seeds"]

    @property
    def agent_kind(self) -> str:
        return self.values["agent.kind"]

    @property
    def out_dir(self) -> str:
        return self.values["output.dir"]

    def env_config(self, *, ego_priority: bool | None = None) -> EnvConfig:
        v = self.values
        priority = v["env.ego_priority"] if ego_priority is None else ego_priority
        cfg = EnvConfig(
            vehicles_min=v["env.vehicles_min"],
            vehicles_max=v["env.vehicles_max"],
            ego_priority=priority,
            ego_destination=v["env.ego_destination"],
        )
        cfg.validate()
        return cfg

    def train_config(self, seed: int, episodes: int | None = None) -> TrainConfig:
        v = self.values
        cfg = TrainConfig(
            gamma=v["training.gamma"],
            learning_rate=v["training.learning_rate"],
            batch_size=v["training.batch_size"],
            target_sync=v["training.target_sync"],
            epsilon_start=v["training.epsilon_start"],
            epsilon_end=v["training.epsilon_end"],
            epsilon_decay_steps=v["training.epsilon_decay_steps"],
            episodes=v["training.episodes"] if episodes is None else episodes,
            replay_capacity=v["training.replay_capacity"],
            seed=seed,
        )
        cfg.validate()
        return cfg

    def attention_config(self) -> AttentionConfig:
        v = self.values
        cfg = AttentionConfig(
            heads=v["agent.attention_heads"],
            d_k=v["agent.attention_dk"],
            layers=v["agent.attention_layers"],
            embed=v["agent.attention_embed"],
        )
        if cfg.heads * cfg.d_k != cfg.embed:
            raise ConfigError(
                "agent.attention_heads * agent.attention_dk must equal agent.attention_embed"
            )
        return cfg

    def with_overrides(self, **dotted) -> "ExperimentConfig":
        """A copy with the given keys (dots spelled as double underscores) replaced."""
        merged = dict(self.values)
        for name, value in dotted.items():
            key = name.replace("__", ".")
            if key not in _SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = value
        return ExperimentConfig(merged)

    def canonical_lines(self) -> list[str]:
        lines = []
        for key in sorted(self.values):
            value = self.values[key]
            if isinstance(value, tuple):
                rendered = ", ".join(str(x) for x in value)
            elif isinstance(value, bool):
                rendered = "true" if value else "false"
            else:
                rendered = str(value)
            lines.append(f"{key} = {rendered}")
        return lines

    def config_hash(self) -> str:
        text = "\n".join(self.canonical_lines())
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def default_config() -> ExperimentConfig:
    return ExperimentConfig({key: default for key, (_, default, _) in _SCHEMA.items()})


def parse_config_text(text: str, source: str = "<string>") -> ExperimentConfig:
    values = {key: default for key, (_, default, _) in _SCHEMA.items()}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: malformed line (expected 'key = value'): {line!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        parser, _, validator = _SCHEMA[key]
        value = parser(raw_value, key)
        if validator is not None:
            verdict = validator(value)
            if verdict is not True:
                raise ConfigError(f"{key}: {verdict} (got {raw_value})")
        values[key] = value

    if values["env.vehicles_max"] < values["env.vehicles_min"]:
        raise ConfigError("env.vehicles_max: must be >= env.vehicles_min")
    config = ExperimentConfig(values)
    config.env_config()
    config.attention_config()
    config.train_config(seed=0)
    return config


def parse_config(path: str) -> ExperimentConfig:
    """Load a config file; missing keys fall back to the documented defaults."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as handle:
        return parse_config_text(handle.read(), source=path)
