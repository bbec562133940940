"""Episodic gate-decision environment.

Time advances in fixed decision ticks. The agent is asked for a decision
only while the current task's gate is closed; once it grants access the
gate stays open until the next task begins, so the environment simulates
that remainder silently and accrues only the success/time reward terms.
Those silently accrued terms are attached to the next emitted transition
(or folded into the current one when the episode ends inside the silent
stretch), so the per-transition rewards always sum to the episode total.

Within a tick, a pending student answer whose latency has elapsed is
graded, mastery is updated, and counters advance; correct answers unlock
the next question, completed question-triples advance the task. Opening
the gate applies from the student's next attempt, not the one in flight.
"""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass, field

import numpy as np

from .domain import Action, GateObservation, RewardConfig, TaskSpec
from .errors import UsageError, ValidationError
from .reward import RewardBreakdown, total_reward
from .student import AiEffectParams, LatencySpec, PopulationSpec, StudentModel

ZERO = RewardBreakdown()


@dataclass
class Transition:
    obs_before: GateObservation
    action: Action
    reward: RewardBreakdown
    obs_after: GateObservation
    terminal: bool
    tick_index: int

    def as_dict(self) -> dict:
        def obs_dict(o):
            return {
                "s_fa": o.failed_attempts_current_question,
                "s_t": o.time_on_task,
                "s_gai": list(o.ai_used_history),
                "s_cu": o.failed_attempts_current_task,
                "task": o.task_index,
                "question": o.question_index,
                "gate_open": o.ai_currently_granted,
            }

        return {
            "tick": self.tick_index,
            "obs_before": obs_dict(self.obs_before),
            "action": "allow" if self.action == Action.ALLOW else "deny",
            "reward": self.reward.as_dict(),
            "obs_after": obs_dict(self.obs_after),
            "terminal": self.terminal,
        }


@dataclass
class EpisodeMetrics:
    reward: RewardBreakdown
    final_mastery: tuple
    questions_answered: int
    failed_attempts: int
    ai_use_count: int
    episode_seconds: float
    n_decisions: int

    @property
    def total_reward(self) -> float:
        return self.reward.total

    def as_dict(self) -> dict:
        return {
            "reward": self.reward.as_dict(),
            "final_mastery": list(self.final_mastery),
            "questions_answered": self.questions_answered,
            "failed_attempts": self.failed_attempts,
            "ai_use_count": self.ai_use_count,
            "episode_seconds": self.episode_seconds,
            "n_decisions": self.n_decisions,
        }


@dataclass(frozen=True)
class StudentSetup:
    """Everything needed to draw one learner for an episode."""

    population: PopulationSpec = PopulationSpec()
    ai: AiEffectParams = AiEffectParams()
    latency: LatencySpec = LatencySpec()
    retake_guess_increment: float = 0.1
    retake_guess_cap: float = 0.6
    cross_task_mastery_bonus: float = 0.05

    def violations(self, path: str = "student") -> list:
        v = []
        v.extend(self.population.violations(f"{path}.population"))
        v.extend(self.ai.violations(f"{path}.ai"))
        v.extend(self.latency.violations(f"{path}.latency"))
        if not 0 <= self.retake_guess_increment <= 1:
            v.append(f"{path}.retake_guess_increment in [0,1]")
        if not 0 <= self.cross_task_mastery_bonus <= 1:
            v.append(f"{path}.cross_task_mastery_bonus in [0,1]")
        return v


class GateEnv:
    """One learner working through the 3-task curriculum under the gate."""

    def __init__(
        self,
        task_spec: TaskSpec = TaskSpec(),
        reward_cfg: RewardConfig = RewardConfig(),
        student_setup: StudentSetup = StudentSetup(),
        seed: int = 0,
    ):
        problems = task_spec.violations() + reward_cfg.violations() + student_setup.violations()
        if problems:
            raise ValidationError(problems)
        self.spec = task_spec
        self.reward_cfg = reward_cfg
        self.setup = student_setup
        self.reset(seed)

    # -- lifecycle -----------------------------------------------------

    def reset(self, seed: int = 0) -> GateObservation:
        self.rng = np.random.default_rng(seed)
        self.student = StudentModel.sample(
            self.spec,
            self.setup.population,
            self.setup.ai,
            self.setup.latency,
            self.rng,
            retake_guess_increment=self.setup.retake_guess_increment,
            retake_guess_cap=self.setup.retake_guess_cap,
            cross_task_mastery_bonus=self.setup.cross_task_mastery_bonus,
        )
        self.clock = 0.0
        self.tick_index = 0
        self.task_index = 0
        self.question_index = 0
        self.task_start = 0.0
        self.s_fa = 0
        self.s_cu = 0
        self.history: list = []
        self.gate_open = False
        self.ai_used_this_task = False
        self.terminal = False
        self.cumulative = ZERO
        self._carry = ZERO
        self.questions_answered = 0
        self.failed_attempts = 0
        self.ai_use_count = 0
        self._pending = None  # (completion time, ai_in_use)
        self._start_attempt(0.0)
        return self.observation()

    def observation(self) -> GateObservation:
        # After the curriculum completes, clamp to the final task so the
        # observation stays within the declared domain.
        ti = min(self.task_index, self.spec.n_tasks - 1)
        return GateObservation(
            failed_attempts_current_question=self.s_fa,
            time_on_task=self.clock - self.task_start,
            ai_used_history=tuple(self.history[:ti]),
            failed_attempts_current_task=self.s_cu,
            task_index=ti,
            question_index=self.question_index,
            ai_currently_granted=self.gate_open,
        )

    @property
    def decision_pending(self) -> bool:
        return not self.terminal and not self.gate_open

    # -- internals -----------------------------------------------------

    def _start_attempt(self, now: float) -> None:
        ai = self.gate_open and self.rng.random() < self.student.ai.p_use_when_available
        latency = self.student.answer_latency(ai, self.reward_cfg.tick_seconds)
        self._pending = (now + latency, ai)

    def _simulate_until(self, t_end: float) -> int:
        """Grade every pending answer landing in (clock, t_end]; returns the
        number of tasks completed in the interval."""
        completions = 0
        while self._pending is not None and self._pending[0] <= t_end and not self.terminal:
            when, ai = self._pending
            self._pending = None
            item = self.spec.item_id(self.task_index, self.question_index)
            skill = self.task_index
            p = self.student.attempt_correct_prob(skill, item, self.s_fa, ai)
            correct = self.rng.random() < p
            self.student.observe(skill, item, self.s_fa, correct, ai)
            if ai:
                self.ai_used_this_task = True
                self.ai_use_count += 1
            if correct:
                self.questions_answered += 1
                self.question_index += 1
                self.s_fa = 0
                if self.question_index >= self.spec.questions_per_task:
                    completions += 1
                    self.history.append(self.ai_used_this_task)
                    self.task_index += 1
                    if self.task_index >= self.spec.n_tasks:
                        self.terminal = True
                        self.question_index = 0
                        break
                    self.question_index = 0
                    self.s_cu = 0
                    self.task_start = when
                    self.gate_open = False
                    self.ai_used_this_task = False
                    self.student.enter_task(self.task_index)
            else:
                self.s_fa += 1
                self.s_cu += 1
                self.failed_attempts += 1
            self._start_attempt(when)
        return completions

    def _advance_tick(self) -> int:
        t_end = self.clock + self.reward_cfg.tick_seconds
        completions = self._simulate_until(t_end)
        self.clock = t_end
        self.tick_index += 1
        if not self.terminal and self.clock >= self.spec.episode_time_cap_seconds:
            self.terminal = True
        return completions

    # -- decision interface ---------------------------------------------

    def step(self, action: Action) -> Transition:
        """Apply one gate decision; returns the transition for this epoch.

        Only legal at a decision point (episode alive, gate closed). The
        returned reward includes anything accrued silently since the
        previous decision.
        """
        if self.terminal:
            raise UsageError("step() on a terminal episode")
        if self.gate_open:
            raise UsageError("step() while the gate is already open for this task")
        obs0 = self.observation()
        action = Action(action)
        if action == Action.ALLOW:
            self.gate_open = True
        completions = self._advance_tick()
        tick_reward = total_reward(obs0, action, completions > 0, self.reward_cfg)
        if completions > 1:  # only reachable when latency fits inside a tick
            extra = self.reward_cfg.c_succ * (completions - 1)
            tick_reward = tick_reward + RewardBreakdown(success=extra)
        reward = self._carry + tick_reward
        self._carry = ZERO
        # Silent stretch: gate open means no decisions until the task ends.
        silent = ZERO
        while not self.terminal and self.gate_open:
            completions = self._advance_tick()
            silent = silent + RewardBreakdown(
                success=self.reward_cfg.c_succ * completions,
                time=-self.reward_cfg.c_time,
            )
        if self.terminal:
            reward = reward + silent
        else:
            self._carry = silent
        self.cumulative = self.cumulative + reward
        return Transition(
            obs_before=obs0,
            action=action,
            reward=reward,
            obs_after=self.observation(),
            terminal=self.terminal,
            tick_index=self.tick_index - 1,
        )

    def metrics(self) -> EpisodeMetrics:
        return EpisodeMetrics(
            reward=self.cumulative,
            final_mastery=tuple(self.student.mastery),
            questions_answered=self.questions_answered,
            failed_attempts=self.failed_attempts,
            ai_use_count=self.ai_use_count,
            episode_seconds=self.clock,
            n_decisions=self.tick_index,
        )


# -- fixed policies and batch evaluation ---------------------------------


def always_policy(obs, rng) -> Action:
    return Action.ALLOW


def never_policy(obs, rng) -> Action:
    return Action.DENY


class RandomPolicy:
    def __init__(self, p_allow: float):
        if not 0 <= p_allow <= 1:
            raise ValidationError("random policy probability in [0,1]")
        self.p_allow = p_allow

    def __call__(self, obs, rng) -> Action:
        return Action.ALLOW if rng.random() < self.p_allow else Action.DENY


def resolve_policy(policy):
    """Accepts a callable, 'always', 'never', 'random:P', or a checkpoint path."""
    if callable(policy):
        return policy
    if policy == "always":
        return always_policy
    if policy == "never":
        return never_policy
    if isinstance(policy, str) and policy.startswith("random:"):
        return RandomPolicy(float(policy.split(":", 1)[1]))
    from .agents.common import greedy_checkpoint_policy  # lazy: agents imports env

    return greedy_checkpoint_policy(policy)


def episode_seed(base_seed: int, episode: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(base_seed), int(episode)])


def run_episode(env: GateEnv, policy, policy_rng) -> EpisodeMetrics:
    while env.decision_pending:
        env.step(policy(env.observation(), policy_rng))
    return env.metrics()


def run_fixed_policy(
    policy,
    n_episodes: int,
    seed: int = 0,
    task_spec: TaskSpec = TaskSpec(),
    reward_cfg: RewardConfig = RewardConfig(),
    student_setup: StudentSetup = StudentSetup(),
    log_path=None,
):
    """Evaluate a policy over n episodes with per-episode derived seeds.

    Episode i always draws its student from seed (seed, i), so different
    policies evaluated with the same base seed face the same learners
    (common random numbers).
    """
    if n_episodes < 1:
        raise ValidationError("n_episodes >= 1")
    fn = resolve_policy(policy)
    env = GateEnv(task_spec, reward_cfg, student_setup, seed=0)
    out = []
    log = TransitionLog(log_path) if log_path else None
    for i in range(n_episodes):
        ss = episode_seed(seed, i)
        env.reset(ss)
        policy_rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(i), 1]))
        while env.decision_pending:
            tr = env.step(fn(env.observation(), policy_rng))
            if log:
                log.write(tr)
        out.append(env.metrics())
    if log:
        log.close()
    return out


class TransitionLog:
    """Append-only JSON-lines transition log; gzip when the path ends .gz."""

    def __init__(self, path):
        self.path = str(path)
        if self.path.endswith(".gz"):
            self._fh = gzip.open(self.path, "at", encoding="utf-8")
        else:
            self._fh = open(self.path, "a", encoding="utf-8")

    def write(self, transition: Transition) -> None:
        self._fh.write(json.dumps(transition.as_dict()) + "\n")

    def close(self) -> None:
        self._fh.close()

    @staticmethod
    def read(path):
        opener = gzip.open if str(path).endswith(".gz") else open
        with opener(path, "rt", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]
