"""Core vocabulary: observations, actions, task layout, reward constants.

Everything here is an immutable value object. The observation mirrors the
four learner-state variables the gate policy conditions on (failed attempts
on the current question, time on the current task, per-task AI-use history,
failed attempts aggregated over the current task) plus bookkeeping indices.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


class Action(enum.IntEnum):
    """Binary gate decision. Deny sorts below Allow for tie-breaking."""

    DENY = 0
    ALLOW = 1


@dataclass(frozen=True)
class GateObservation:
    """Agent-visible state at one decision epoch."""

    failed_attempts_current_question: int = 0
    time_on_task: float = 0.0
    ai_used_history: tuple = ()
    failed_attempts_current_task: int = 0
    task_index: int = 0
    question_index: int = 0
    ai_currently_granted: bool = False

    def violations(self) -> list:
        v = []
        if self.failed_attempts_current_question < 0:
            v.append("failed_attempts_current_question >= 0")
        if self.time_on_task < 0:
            v.append("time_on_task >= 0")
        if self.failed_attempts_current_task < 0:
            v.append("failed_attempts_current_task >= 0")
        if self.failed_attempts_current_question > self.failed_attempts_current_task:
            v.append("failed_attempts_current_question <= failed_attempts_current_task")
        if self.task_index not in (0, 1, 2):
            v.append("task_index in {0,1,2}")
        if self.question_index not in (0, 1, 2):
            v.append("question_index in {0,1,2}")
        if len(self.ai_used_history) != self.task_index:
            v.append("len(ai_used_history) == task_index")
        return v

    def validate(self) -> "GateObservation":
        v = self.violations()
        if v:
            raise ValidationError(v)
        return self


@dataclass(frozen=True)
class RewardConfig:
    """Shaping constants. Units are reward units unless noted."""

    c_succ: float = 10.0
    c_time: float = 0.05
    c_mt: float = 0.5
    c_pf: float = 2.0
    alpha: float = 0.02   # reward units per second of struggle (1-2 failures)
    beta: float = 0.05    # reward units per second of struggle (>2 failures)
    delta: float = 0.02   # early-access penalty rate per second
    early_threshold_seconds: float = 60.0
    tick_seconds: float = 5.0

    def violations(self, path: str = "reward") -> list:
        v = []
        for name in ("c_succ", "c_time", "c_mt", "c_pf", "alpha", "beta", "delta"):
            if getattr(self, name) < 0:
                v.append(f"{path}.{name} >= 0")
        if self.beta < self.alpha:
            v.append(f"{path}.beta >= {path}.alpha")
        if self.early_threshold_seconds <= 0:
            v.append(f"{path}.early_threshold_seconds > 0")
        if self.tick_seconds <= 0:
            v.append(f"{path}.tick_seconds > 0")
        return v


@dataclass(frozen=True)
class TaskSpec:
    """Curriculum layout: 3 tasks, each gated behind 3 in-order questions."""

    task_ids: tuple = ("task0", "task1", "task2")
    questions_per_task: int = 3
    episode_time_cap_seconds: float = 1200.0
    item_ids: tuple = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.item_ids is None:
            items = tuple(
                f"{tid}_q{q}" for tid in self.task_ids for q in range(self.questions_per_task)
            )
            object.__setattr__(self, "item_ids", items)

    @property
    def n_tasks(self) -> int:
        return len(self.task_ids)

    def item_id(self, task_index: int, question_index: int) -> str:
        return self.item_ids[task_index * self.questions_per_task + question_index]

    def violations(self, path: str = "tasks") -> list:
        v = []
        if self.n_tasks != 3:
            v.append(f"{path}: exactly 3 tasks")
        if self.questions_per_task != 3:
            v.append(f"{path}: exactly 3 questions per task")
        if len(self.item_ids) != self.n_tasks * self.questions_per_task:
            v.append(f"{path}: one item per task-question")
        if len(set(self.item_ids)) != len(self.item_ids):
            v.append(f"{path}: item_ids distinct")
        if self.episode_time_cap_seconds <= 0:
            v.append(f"{path}.episode_time_cap_seconds > 0")
        return v


@dataclass(frozen=True)
class FeatureCaps:
    """Saturation caps applied before scaling observation components."""

    fa_cap: int = 5
    time_cap: float = 300.0
    cu_cap: int = 10

    def violations(self, path: str = "training.features") -> list:
        v = []
        if self.fa_cap <= 0:
            v.append(f"{path}.fa_cap > 0")
        if self.time_cap <= 0:
            v.append(f"{path}.time_cap > 0")
        if self.cu_cap <= 0:
            v.append(f"{path}.cu_cap > 0")
        return v


FEATURE_DIM = 10


def featurize(
    obs: GateObservation, caps: FeatureCaps = FeatureCaps(), validate: bool = True
) -> np.ndarray:
    """Encode an observation as a length-10 vector, every entry in [-1, 1].

    Layout: [fa, time, cu, task one-hot (3), history slots (3), gate flag].
    History slots hold +1 (AI used on that completed task), -1 (not used),
    0 (task not completed yet), so one fixed-width network serves all tasks.
    validate=False skips invariant checking for trusted in-process callers.
    """
    if validate:
        obs.validate()
    x = np.zeros(FEATURE_DIM)
    x[0] = min(obs.failed_attempts_current_question, caps.fa_cap) / caps.fa_cap
    x[1] = min(obs.time_on_task, caps.time_cap) / caps.time_cap
    x[2] = min(obs.failed_attempts_current_task, caps.cu_cap) / caps.cu_cap
    x[3 + obs.task_index] = 1.0
    for i, used in enumerate(obs.ai_used_history[:3]):
        x[6 + i] = 1.0 if used else -1.0
    x[9] = 1.0 if obs.ai_currently_granted else 0.0
    return x


def quantize_to_tick(seconds: float, tick_seconds: float) -> float:
    """Floor wall-clock seconds onto the decision-epoch grid."""
    if seconds <= 0:
        return 0.0
    return math.floor(seconds / tick_seconds) * tick_seconds
