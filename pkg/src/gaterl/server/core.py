"""Session decision core: the env's gate semantics driven by client events.

The core is a pure, clock-free state machine. Wall time enters only as
event timestamps (seconds); time-on-task is the timestamp delta quantized
to the decision tick, so client clock skew can coarsen but not corrupt the
observation. For rl sessions the greedy policy is re-evaluated at every
elapsed tick boundary (caught up lazily on each event) and once more on
each state-changing event; an Allow opens the gate for the rest of the
current task, exactly as in the simulated environment.

Offline replay uses this same class, so a session export replayed through
`replay_events` must reproduce the identical decision sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..domain import Action, GateObservation, TaskSpec, quantize_to_tick
from ..errors import OrderingError, SequencingError, UsageError, ValidationError

CONDITIONS = ("rl", "always", "never")


def obs_as_dict(obs: GateObservation) -> dict:
    return {
        "s_fa": obs.failed_attempts_current_question,
        "s_t": obs.time_on_task,
        "s_gai": [bool(b) for b in obs.ai_used_history],
        "s_cu": obs.failed_attempts_current_task,
        "task": obs.task_index,
        "question": obs.question_index,
        "gate_open": obs.ai_currently_granted,
    }


@dataclass
class GateDecision:
    ts: float  # event-time seconds at which the decision was evaluated
    obs: GateObservation
    action: Action

    def as_dict(self) -> dict:
        return {
            "ts": self.ts,
            "obs": obs_as_dict(self.obs),
            "action": "allow" if self.action == Action.ALLOW else "deny",
        }


class GateSessionCore:
    """Gate state for one learner session."""

    def __init__(
        self,
        condition: str,
        policy=None,
        task_spec: TaskSpec = TaskSpec(),
        tick_seconds: float = 5.0,
    ):
        if condition not in CONDITIONS:
            raise ValidationError(f"condition must be one of {CONDITIONS}")
        if condition == "rl" and policy is None:
            raise ValidationError("rl condition requires a policy")
        if tick_seconds <= 0:
            raise ValidationError("tick_seconds > 0")
        self.condition = condition
        self.policy = policy
        self.spec = task_spec
        self.tick = float(tick_seconds)
        self.task_index = 0
        self.question_index = 0
        self.s_fa = 0
        self.s_cu = 0
        self.history: list = []
        self.gate_open = False
        self.chat_used_this_task = False
        self.completed = False
        self.task_start_ts: float | None = None
        self.last_ts: float | None = None
        self.last_decided_k = -1
        self.decisions: list = []

    # -- reads ----------------------------------------------------------

    @property
    def ai_allowed(self) -> bool:
        if self.condition == "always":
            return True
        if self.condition == "never":
            return False
        return self.gate_open and not self.completed

    def gate_status(self) -> dict:
        return {
            "ai_allowed": self.ai_allowed,
            "task": self.task_index,
            "question": self.question_index,
            "completed": self.completed,
        }

    def observation(self, ts: float) -> GateObservation:
        ti = min(self.task_index, self.spec.n_tasks - 1)
        return GateObservation(
            failed_attempts_current_question=self.s_fa,
            time_on_task=self._s_t(ts),
            ai_used_history=tuple(self.history[:ti]),
            failed_attempts_current_task=self.s_cu,
            task_index=ti,
            question_index=self.question_index,
            ai_currently_granted=self.gate_open,
        )

    def expected_question_id(self) -> str | None:
        if self.completed:
            return None
        return self.spec.item_id(self.task_index, self.question_index)

    # -- internals --------------------------------------------------------

    def _s_t(self, ts: float) -> float:
        if self.task_start_ts is None:
            return 0.0
        return quantize_to_tick(max(ts - self.task_start_ts, 0.0), self.tick)

    def _decide(self, ts: float, k: int) -> None:
        obs = GateObservation(
            failed_attempts_current_question=self.s_fa,
            time_on_task=k * self.tick,
            ai_used_history=tuple(self.history[: min(self.task_index, self.spec.n_tasks - 1)]),
            failed_attempts_current_task=self.s_cu,
            task_index=min(self.task_index, self.spec.n_tasks - 1),
            question_index=self.question_index,
            ai_currently_granted=False,
        )
        action = Action(self.policy(obs, None))
        self.decisions.append(GateDecision(ts=ts, obs=obs, action=action))
        self.last_decided_k = k
        if action == Action.ALLOW:
            self.gate_open = True

    # Bound on boundaries processed per event (one hour of 5 s ticks), so a
    # wild timestamp jump cannot inflate the decision log without limit; the
    # skipped stretch is deterministic, keeping replays identical.
    MAX_CATCHUP = 720

    def _catch_up(self, ts: float) -> None:
        """Evaluate every tick boundary elapsed since the last decision."""
        if self.condition != "rl" or self.gate_open or self.completed:
            return
        if self.task_start_ts is None:
            self.task_start_ts = ts
        k_now = int(self._s_t(ts) / self.tick)
        k_from = self.last_decided_k + 1
        if k_now + 1 - k_from > self.MAX_CATCHUP:
            k_from = k_now + 1 - self.MAX_CATCHUP
        for k in range(k_from, k_now + 1):
            self._decide(self.task_start_ts + k * self.tick, k)
            if self.gate_open:
                break
        if not self.gate_open:
            self.last_decided_k = max(self.last_decided_k, k_now)

    def _event_decision(self, ts: float) -> None:
        """Extra evaluation right after a state-changing event."""
        if self.condition != "rl" or self.gate_open or self.completed:
            return
        self._decide(ts, int(self._s_t(ts) / self.tick))

    # -- event ingestion --------------------------------------------------

    def apply_event(self, kind: str, ts: float, question_id=None, correct=None) -> dict:
        """Fold one client event in; returns the updated gate status.

        kind 'heartbeat' only advances time; 'answer' also grades. Events
        must arrive in nondecreasing timestamp order.
        """
        ts = float(ts)
        if self.last_ts is not None and ts < self.last_ts:
            raise OrderingError(
                f"event timestamp {ts} precedes last seen {self.last_ts}"
            )
        if kind not in ("heartbeat", "answer"):
            raise ValidationError(f"unknown event type {kind!r}")
        if self.task_start_ts is None:
            self.task_start_ts = ts
        self._catch_up(ts)
        if kind == "answer":
            if correct is None or question_id is None:
                raise ValidationError("answer events need question_id and correct")
            expected = self.expected_question_id()
            if expected is None:
                raise SequencingError("all questions already completed")
            if str(question_id) != expected:
                raise SequencingError(
                    f"question {question_id!r} is not unlocked (expected {expected!r})"
                )
            if correct:
                self._advance(ts)
            else:
                self.s_fa += 1
                self.s_cu += 1
            self._event_decision(ts)
        self.last_ts = ts
        return self.gate_status()

    def _advance(self, ts: float) -> None:
        self.question_index += 1
        self.s_fa = 0
        if self.question_index >= self.spec.questions_per_task:
            self.history.append(self.chat_used_this_task)
            self.task_index += 1
            self.question_index = 0
            if self.task_index >= self.spec.n_tasks:
                self.completed = True
                self.task_index = self.spec.n_tasks
                return
            self.s_cu = 0
            self.gate_open = False
            self.chat_used_this_task = False
            self.task_start_ts = ts
            self.last_decided_k = -1

    def note_chat_used(self) -> None:
        if not self.ai_allowed:
            raise UsageError("chat marked used while the gate is closed")
        self.chat_used_this_task = True

    def decisions_as_dicts(self) -> list:
        return [d.as_dict() for d in self.decisions]


def replay_events(
    condition: str,
    policy,
    events,
    task_spec: TaskSpec = TaskSpec(),
    tick_seconds: float = 5.0,
) -> list:
    """Re-run an exported event stream through a fresh core.

    `events` are dicts with keys type, ts_seconds, and for answers
    question_id/correct, plus chat_ok markers for successful chat calls
    (which flip the AI-used flag exactly as the live session did).
    Returns the decision dicts for comparison against the exported ones.
    """
    core = GateSessionCore(condition, policy, task_spec, tick_seconds)
    for event in events:
        kind = event["type"]
        if kind == "chat_ok":
            core.note_chat_used()
            continue
        core.apply_event(
            kind,
            event["ts_seconds"],
            question_id=event.get("question_id"),
            correct=event.get("correct"),
        )
    return core.decisions_as_dicts()
