"""Simulated learner: Bayesian knowledge tracing with per-item guess/slip,
capped guess inflation across retakes, an explicit model of how granted AI
access changes behaviour, and truncated-normal population sampling.

One hidden mastery state is tracked per task (3 skills); each skill emits
through its task's three items. The paper-level model leaves open how AI
access alters simulated answers, so that gap is modelled explicitly here:
AI-mediated attempts succeed with a fixed probability, answer faster, and
learn at an attenuated rate (cognitive-offloading reading).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import norm

from .domain import TaskSpec
from .errors import ValidationError


def sample_truncated_normal(mean, std, lo, hi, rng: np.random.Generator) -> float:
    """Draw from Normal(mean, std) conditioned on [lo, hi].

    Rejection sampling, switching to the inverse-CDF construction when the
    acceptance mass of the window falls below 1% (keeps latency bounded for
    far-out windows). std == 0 degenerates to the mean, clipped to bounds.
    """
    if lo > hi:
        raise ValidationError("truncated normal requires lo <= hi")
    if std < 0:
        raise ValidationError("truncated normal requires std >= 0")
    if std == 0:
        return float(min(max(mean, lo), hi))
    a = (lo - mean) / std
    b = (hi - mean) / std
    acceptance = norm.cdf(b) - norm.cdf(a)
    if acceptance < 0.01:
        u = rng.uniform(norm.cdf(a), norm.cdf(b))
        return float(mean + std * norm.ppf(u))
    while True:
        x = rng.normal(mean, std)
        if lo <= x <= hi:
            return float(x)


@dataclass(frozen=True)
class TruncNormSpec:
    """(mean, std, lower, upper) for one population parameter."""

    mean: float
    std: float
    lo: float
    hi: float

    def violations(self, path: str) -> list:
        v = []
        if not (self.lo <= self.mean <= self.hi):
            v.append(f"{path}: lo <= mean <= hi")
        if self.std < 0:
            v.append(f"{path}.std >= 0")
        return v

    def sample(self, rng: np.random.Generator) -> float:
        return sample_truncated_normal(self.mean, self.std, self.lo, self.hi, rng)


@dataclass(frozen=True)
class PopulationSpec:
    """Truncated-normal population over the four core BKT parameters."""

    p_init: TruncNormSpec = TruncNormSpec(0.35, 0.15, 0.05, 0.9)
    p_learn: TruncNormSpec = TruncNormSpec(0.25, 0.1, 0.05, 0.7)
    guess: TruncNormSpec = TruncNormSpec(0.2, 0.08, 0.02, 0.45)
    slip: TruncNormSpec = TruncNormSpec(0.1, 0.05, 0.01, 0.3)

    def violations(self, path: str = "student.population") -> list:
        v = []
        for name in ("p_init", "p_learn", "guess", "slip"):
            v.extend(getattr(self, name).violations(f"{path}.{name}"))
        return v


@dataclass(frozen=True)
class AiEffectParams:
    """How granted access changes the simulated learner.

    learn_attenuation multiplies the learning rate on AI-mediated attempts;
    latency_factor shortens answer latency when AI is used.
    """

    p_use_when_available: float = 0.8
    p_ai_correct: float = 0.9
    learn_attenuation: float = 0.5
    latency_factor: float = 0.6

    def violations(self, path: str = "student.ai") -> list:
        v = []
        for name in ("p_use_when_available", "p_ai_correct", "learn_attenuation"):
            if not 0 <= getattr(self, name) <= 1:
                v.append(f"{path}.{name} in [0,1]")
        if not 0 < self.latency_factor <= 1:
            v.append(f"{path}.latency_factor in (0,1]")
        return v


@dataclass(frozen=True)
class LatencySpec:
    """Answer-latency distribution (seconds), before AI speed-up."""

    mean: float = 35.0
    std: float = 15.0
    lo: float = 10.0
    hi: float = 120.0

    def violations(self, path: str = "student.latency") -> list:
        v = []
        if not (self.lo <= self.mean <= self.hi):
            v.append(f"{path}: lo <= mean <= hi")
        if self.std < 0:
            v.append(f"{path}.std >= 0")
        if self.lo <= 0:
            v.append(f"{path}.lo > 0")
        return v


@dataclass(frozen=True)
class BktParams:
    """Per-skill init/learn rates plus per-item guess/slip (KT-IDEM)."""

    p_init: tuple          # one per skill
    p_learn: tuple         # one per skill
    guess: dict            # item_id -> probability
    slip: dict             # item_id -> probability
    retake_guess_increment: float = 0.1
    retake_guess_cap: float = 0.6

    def violations(self, path: str = "student") -> list:
        v = []
        for name in ("p_init", "p_learn"):
            if not all(0 <= p <= 1 for p in getattr(self, name)):
                v.append(f"{path}.{name} in [0,1]")
        for name in ("guess", "slip"):
            if not all(0 <= p <= 1 for p in getattr(self, name).values()):
                v.append(f"{path}.{name} in [0,1]")
        if not 0 <= self.retake_guess_increment <= 1:
            v.append(f"{path}.retake_guess_increment in [0,1]")
        if self.guess and self.retake_guess_cap < max(self.guess.values()):
            v.append(f"{path}.retake_guess_cap >= max item guess")
        return v


def bkt_update(
    L: float,
    correct: bool,
    guess: float,
    slip: float,
    p_learn: float,
    ai_mediated: bool = False,
    learn_attenuation: float = 1.0,
) -> float:
    """Posterior-then-learn mastery update.

    Degenerate evidence (zero denominator) keeps the prior belief: the
    observation is impossible under both hidden states, so it carries no
    information.
    """
    if correct:
        num = L * (1.0 - slip)
        den = num + (1.0 - L) * guess
    else:
        num = L * slip
        den = num + (1.0 - L) * (1.0 - guess)
    post = L if den == 0 else num / den
    rate = p_learn * (learn_attenuation if ai_mediated else 1.0)
    out = post + (1.0 - post) * rate
    return min(max(out, 0.0), 1.0)


@dataclass
class StudentModel:
    """One simulated learner: sampled parameters plus mutable mastery."""

    params: BktParams
    ai: AiEffectParams
    latency: LatencySpec
    mastery: list = field(default_factory=list)
    cross_task_mastery_bonus: float = 0.05
    rng: np.random.Generator = None  # type: ignore[assignment]

    def __post_init__(self):
        if not self.mastery:
            self.mastery = list(self.params.p_init)
        if self.rng is None:
            self.rng = np.random.default_rng(0)
        if any(not 0 <= m <= 1 for m in self.mastery):
            raise ValidationError("mastery in [0,1]")

    @classmethod
    def sample(
        cls,
        spec: TaskSpec,
        population: PopulationSpec,
        ai: AiEffectParams,
        latency: LatencySpec,
        rng: np.random.Generator,
        retake_guess_increment: float = 0.1,
        retake_guess_cap: float = 0.6,
        cross_task_mastery_bonus: float = 0.05,
    ) -> "StudentModel":
        """Draw one learner from the population, per skill and per item."""
        n_skills = spec.n_tasks
        p_init = tuple(population.p_init.sample(rng) for _ in range(n_skills))
        p_learn = tuple(population.p_learn.sample(rng) for _ in range(n_skills))
        guess = {item: population.guess.sample(rng) for item in spec.item_ids}
        slip = {item: population.slip.sample(rng) for item in spec.item_ids}
        cap = max(retake_guess_cap, max(guess.values()))
        params = BktParams(
            p_init=p_init,
            p_learn=p_learn,
            guess=guess,
            slip=slip,
            retake_guess_increment=retake_guess_increment,
            retake_guess_cap=cap,
        )
        return cls(
            params=params,
            ai=ai,
            latency=latency,
            cross_task_mastery_bonus=cross_task_mastery_bonus,
            rng=rng,
        )

    def effective_guess(self, item: str, retakes: int) -> float:
        g = self.params.guess[item] + retakes * self.params.retake_guess_increment
        return min(g, self.params.retake_guess_cap)

    def attempt_correct_prob(self, skill: int, item: str, retakes: int, ai_in_use: bool) -> float:
        """Emission probability for the next attempt on `item`."""
        if retakes < 0:
            raise ValidationError("retakes >= 0")
        if ai_in_use:
            return self.ai.p_ai_correct
        if item not in self.params.guess:
            raise KeyError(f"unknown item {item!r}")
        L = self.mastery[skill]
        slip = self.params.slip[item]
        return L * (1.0 - slip) + (1.0 - L) * self.effective_guess(item, retakes)

    def observe(self, skill: int, item: str, retakes: int, correct: bool, ai_in_use: bool) -> None:
        """Fold one graded attempt into the skill's mastery belief."""
        self.mastery[skill] = bkt_update(
            self.mastery[skill],
            correct,
            self.effective_guess(item, retakes),
            self.params.slip[item],
            self.params.p_learn[skill],
            ai_mediated=ai_in_use,
            learn_attenuation=self.ai.learn_attenuation,
        )

    def enter_task(self, skill: int) -> None:
        """Carry over a small head start from the previous task's mastery."""
        if skill > 0 and self.cross_task_mastery_bonus > 0:
            bonus = self.cross_task_mastery_bonus * self.mastery[skill - 1]
            self.mastery[skill] = min(1.0, self.mastery[skill] + bonus)

    def answer_latency(self, ai_in_use: bool, tick_seconds: float) -> float:
        """Seconds until the next answer lands, ceiled to the tick grid."""
        t = sample_truncated_normal(
            self.latency.mean, self.latency.std, self.latency.lo, self.latency.hi, self.rng
        )
        if ai_in_use:
            t *= self.ai.latency_factor
        return math.ceil(t / tick_seconds) * tick_seconds


def sequence_likelihood(p_init, p_learn, guess_seq, slip_seq, correct_seq) -> float:
    """Exact likelihood of a correctness sequence under the BKT HMM.

    Independent oracle for the step update: enumerates the number of
    attempts answered while unlearned (mastery onset time) instead of
    running the belief recursion. Emission parameters are per-attempt
    sequences so KT-IDEM item variation is expressible.
    """
    n = len(correct_seq)
    if not (len(guess_seq) == len(slip_seq) == n):
        raise ValidationError("sequences must have equal length")
    if n == 0:
        return 1.0
    total = 0.0
    for j in range(n + 1):  # j attempts answered in the unlearned state
        if j == 0:
            p_path = p_init
        elif j < n:
            p_path = (1.0 - p_init) * (1.0 - p_learn) ** (j - 1) * p_learn
        else:
            p_path = (1.0 - p_init) * (1.0 - p_learn) ** (n - 1)
        emit = 1.0
        for t in range(n):
            if t < j:
                emit *= guess_seq[t] if correct_seq[t] else 1.0 - guess_seq[t]
            else:
                emit *= (1.0 - slip_seq[t]) if correct_seq[t] else slip_seq[t]
        total += p_path * emit
    return total


def recursion_likelihood(p_init, p_learn, guess_seq, slip_seq, correct_seq) -> float:
    """Step-recursion likelihood: product of per-step emission predictions
    with the belief advanced by `bkt_update` after each observation."""
    L = p_init
    prob = 1.0
    for g, s, c in zip(guess_seq, slip_seq, correct_seq):
        p_correct = L * (1.0 - s) + (1.0 - L) * g
        prob *= p_correct if c else 1.0 - p_correct
        L = bkt_update(L, c, g, s, p_learn)
    return prob
