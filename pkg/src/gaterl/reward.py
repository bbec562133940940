"""Pedagogically shaped reward: five additive components.

The total is success + time + metacognitive contrast + productive failure
+ cognitive load. Both gate-dependent terms (productive failure, cognitive
load) are identically zero for Deny; with a binary action set only the
difference between the two actions matters for action selection.

Note on the metacognitive term: an empty AI-use history satisfies both the
"never used AI" and the "always used AI" conditions, so during the first
task both actions collect the contrast bonus. That is the literal reading
of the component and is kept as-is.
"""

from __future__ import annotations

from dataclasses import dataclass

from .domain import Action, GateObservation, RewardConfig


@dataclass(frozen=True)
class RewardBreakdown:
    success: float = 0.0
    time: float = 0.0
    mt: float = 0.0
    pf: float = 0.0
    clt: float = 0.0

    @property
    def total(self) -> float:
        return self.success + self.time + self.mt + self.pf + self.clt

    def __add__(self, other: "RewardBreakdown") -> "RewardBreakdown":
        return RewardBreakdown(
            self.success + other.success,
            self.time + other.time,
            self.mt + other.mt,
            self.pf + other.pf,
            self.clt + other.clt,
        )

    def as_dict(self) -> dict:
        return {
            "success": self.success,
            "time": self.time,
            "mt": self.mt,
            "pf": self.pf,
            "clt": self.clt,
            "total": self.total,
        }


def r_success(task_completed_this_tick: bool, cfg: RewardConfig) -> float:
    """Completion bonus for the tick in which the current task finished."""
    return cfg.c_succ if task_completed_this_tick else 0.0


def r_time(cfg: RewardConfig) -> float:
    """Constant per-tick penalty discouraging trivially long trajectories."""
    return -cfg.c_time


def r_mt(history, action: Action, cfg: RewardConfig) -> float:
    """Contrast bonus: reward the action that differs from every past task.

    Allow earns the bonus when no previous task used AI; Deny earns it when
    every previous task used AI. An empty history satisfies both.
    """
    if action == Action.ALLOW:
        return cfg.c_mt if not any(history) else 0.0
    return cfg.c_mt if all(history) else 0.0


def r_pf(s_fa: int, s_t: float, action: Action, cfg: RewardConfig) -> float:
    """Productive-failure shaping; zero for Deny.

    Granting help before any failure costs c_pf; after some struggle it pays
    proportionally to time on task, at a steeper rate once failures exceed 2.
    """
    if action == Action.DENY:
        return 0.0
    if s_fa == 0:
        return -cfg.c_pf
    if s_fa <= 2:
        return cfg.alpha * s_t
    return cfg.beta * s_t


def r_clt(s_t: float, action: Action, cfg: RewardConfig) -> float:
    """Early-offloading penalty; zero for Deny and past the threshold."""
    if action == Action.DENY:
        return 0.0
    t = cfg.early_threshold_seconds
    return -cfg.delta * (t - s_t) if s_t < t else 0.0


def total_reward(
    obs: GateObservation,
    action: Action,
    task_completed: bool,
    cfg: RewardConfig,
) -> RewardBreakdown:
    """Componentwise evaluation of the full shaped reward for one tick."""
    return RewardBreakdown(
        success=r_success(task_completed, cfg),
        time=r_time(cfg),
        mt=r_mt(obs.ai_used_history, action, cfg),
        pf=r_pf(obs.failed_attempts_current_question, obs.time_on_task, action, cfg),
        clt=r_clt(obs.time_on_task, action, cfg),
    )
