"""JSON configuration: defaults, nested merging, strict key checking.

The file holds up to five top-level sections — reward, tasks, student,
training, server — and every field in every section is optional; omitted
fields keep their documented defaults. Unknown keys anywhere are rejected
with their full path so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

from .agents.configs import A2cConfig, DqnConfig, PpoConfig
from .domain import FeatureCaps, RewardConfig, TaskSpec
from .env import StudentSetup
from .errors import ValidationError
from .student import AiEffectParams, LatencySpec, PopulationSpec, TruncNormSpec


@dataclass(frozen=True)
class TrainingConfig:
    features: FeatureCaps = FeatureCaps()
    hidden: tuple = (32, 32)
    eval_episodes: int = 100
    eval_every_steps: int = 50_000
    ppo: PpoConfig = PpoConfig()
    dqn: DqnConfig = DqnConfig()
    a2c: A2cConfig = A2cConfig()

    def violations(self, path: str = "training") -> list:
        v = list(self.features.violations(f"{path}.features"))
        if not self.hidden or any(int(h) <= 0 for h in self.hidden):
            v.append(f"{path}.hidden: positive layer widths")
        if self.eval_episodes < 1:
            v.append(f"{path}.eval_episodes >= 1")
        if self.eval_every_steps < 1:
            v.append(f"{path}.eval_every_steps >= 1")
        v.extend(self.ppo.violations(f"{path}.ppo"))
        v.extend(self.dqn.violations(f"{path}.dqn"))
        v.extend(self.a2c.violations(f"{path}.a2c"))
        return v


@dataclass(frozen=True)
class ChatBackendConfig:
    mode: str = "stub"  # stub | external
    endpoint: str = ""
    auth_token_env: str = ""  # name of the env var holding the token
    model: str = ""
    timeout_seconds: float = 10.0

    def violations(self, path: str = "server.chat") -> list:
        v = []
        if self.mode not in ("stub", "external"):
            v.append(f"{path}.mode in {{stub, external}}")
        if self.mode == "external" and not self.endpoint:
            v.append(f"{path}.endpoint required in external mode")
        if self.timeout_seconds <= 0:
            v.append(f"{path}.timeout_seconds > 0")
        return v


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    session_ttl_seconds: float = 7200.0
    checkpoint: str = ""  # required only for rl-condition sessions
    journal_path: str = ""  # append-only JSONL journal; empty disables
    chat: ChatBackendConfig = ChatBackendConfig()

    def violations(self, path: str = "server") -> list:
        v = []
        if not 0 < self.port < 65536:
            v.append(f"{path}.port in (0, 65536)")
        if self.session_ttl_seconds <= 0:
            v.append(f"{path}.session_ttl_seconds > 0")
        v.extend(self.chat.violations(f"{path}.chat"))
        return v


@dataclass(frozen=True)
class AppConfig:
    reward: RewardConfig = RewardConfig()
    tasks: TaskSpec = TaskSpec()
    student: StudentSetup = StudentSetup()
    training: TrainingConfig = TrainingConfig()
    server: ServerConfig = ServerConfig()


# Fields that are derived rather than configured.
_EXCLUDED = {TaskSpec: {"item_ids"}}

_TUPLE_FIELDS = {"task_ids", "hidden"}


def _build(cls, data, path):
    """Construct dataclass `cls` from a plain dict, strictly."""
    if not isinstance(data, dict):
        raise ValidationError([f"{path}: expected an object"])
    fields = {f.name: f for f in dataclasses.fields(cls) if f.name not in _EXCLUDED.get(cls, ())}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ValidationError([f"{path}.{k}: unknown key" for k in unknown])
    kwargs = {}
    for name, value in data.items():
        sub = _nested_type(cls, name)
        key = f"{path}.{name}" if path else name
        if sub is not None:
            kwargs[name] = _build(sub, value, key)
        elif name in _TUPLE_FIELDS:
            if not isinstance(value, (list, tuple)):
                raise ValidationError([f"{key}: expected a list"])
            kwargs[name] = tuple(value)
        else:
            if isinstance(value, (dict, list)):
                raise ValidationError([f"{key}: expected a scalar"])
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ValidationError([f"{path}: {exc}"]) from exc


_NESTED = {
    (AppConfig, "reward"): RewardConfig,
    (AppConfig, "tasks"): TaskSpec,
    (AppConfig, "student"): StudentSetup,
    (AppConfig, "training"): TrainingConfig,
    (AppConfig, "server"): ServerConfig,
    (StudentSetup, "population"): PopulationSpec,
    (StudentSetup, "ai"): AiEffectParams,
    (StudentSetup, "latency"): LatencySpec,
    (PopulationSpec, "p_init"): TruncNormSpec,
    (PopulationSpec, "p_learn"): TruncNormSpec,
    (PopulationSpec, "guess"): TruncNormSpec,
    (PopulationSpec, "slip"): TruncNormSpec,
    (TrainingConfig, "features"): FeatureCaps,
    (TrainingConfig, "ppo"): PpoConfig,
    (TrainingConfig, "dqn"): DqnConfig,
    (TrainingConfig, "a2c"): A2cConfig,
    (ServerConfig, "chat"): ChatBackendConfig,
}


def _nested_type(cls, name):
    return _NESTED.get((cls, name))


def config_from_dict(data: dict) -> AppConfig:
    """Build a full AppConfig from a (possibly partial) plain dict."""
    return _build(AppConfig, data or {}, "")


def load_config(path) -> AppConfig:
    """Read a JSON config file; missing sections keep defaults."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError([f"config file unreadable: {exc}"]) from exc
    except ValueError as exc:
        raise ValidationError([f"config file is not valid JSON: {exc}"]) from exc
    return config_from_dict(data)


def validate_config(cfg: AppConfig) -> list:
    """Every violated constraint, with field paths; empty list means ok."""
    v = []
    v.extend(cfg.reward.violations("reward"))
    v.extend(cfg.tasks.violations("tasks"))
    v.extend(cfg.student.violations("student"))
    v.extend(cfg.training.violations("training"))
    v.extend(cfg.server.violations("server"))
    return v


def require_valid(cfg: AppConfig) -> AppConfig:
    violations = validate_config(cfg)
    if violations:
        raise ValidationError(violations)
    return cfg


def config_as_dict(cfg: AppConfig) -> dict:
    return dataclasses.asdict(cfg)


def config_hash(cfg: AppConfig) -> str:
    """Stable digest of the full effective configuration."""
    blob = json.dumps(config_as_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
