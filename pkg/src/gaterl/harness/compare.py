"""Common-random-numbers policy comparison with bootstrap intervals.

Every policy is evaluated on the same per-episode student seeds, so
per-episode differences isolate the policy effect; uncertainty comes from
a percentile bootstrap over episodes (no normality assumption).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from ..config import AppConfig
from ..env import run_fixed_policy
from ..errors import ValidationError

BOOTSTRAP_RESAMPLES = 10_000
_CHUNK = 2_000  # resamples per index block, to bound memory


def bootstrap_mean_ci(values, resamples, rng, level=0.95):
    """Percentile bootstrap interval for the mean of `values`."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if n == 0:
        raise ValidationError("bootstrap needs at least one value")
    means = np.empty(resamples)
    done = 0
    while done < resamples:
        k = min(_CHUNK, resamples - done)
        idx = rng.integers(0, n, size=(k, n))
        means[done : done + k] = values[idx].mean(axis=1)
        done += k
    tail = 100.0 * (1.0 - level) / 2.0
    lo, hi = np.percentile(means, [tail, 100.0 - tail])
    point = float(values.mean())
    return float(min(lo, point)), float(max(hi, point))


@dataclass(frozen=True)
class PolicyStats:
    name: str
    n: int
    mean_return: float
    sd_return: float
    ci_low: float
    ci_high: float
    mean_mastery: tuple  # one per skill
    mean_overall_mastery: float
    mean_ai_use: float
    mean_seconds: float
    mean_questions: float


@dataclass(frozen=True)
class PairwiseDelta:
    a: str
    b: str
    delta_mean: float
    ci_low: float
    ci_high: float


@dataclass
class ComparisonReport:
    stats: dict  # name -> PolicyStats
    deltas: list  # PairwiseDelta, all ordered pairs a<b
    n_episodes: int
    seed: int
    resamples: int

    def as_dict(self) -> dict:
        return {
            "stats": {k: asdict(v) for k, v in self.stats.items()},
            "deltas": [asdict(d) for d in self.deltas],
            "n_episodes": self.n_episodes,
            "seed": self.seed,
            "resamples": self.resamples,
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, path) -> "ComparisonReport":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        stats = {
            k: PolicyStats(**{**v, "mean_mastery": tuple(v["mean_mastery"])})
            for k, v in doc["stats"].items()
        }
        deltas = [PairwiseDelta(**d) for d in doc["deltas"]]
        return cls(
            stats=stats,
            deltas=deltas,
            n_episodes=doc["n_episodes"],
            seed=doc["seed"],
            resamples=doc["resamples"],
        )

    def delta(self, a: str, b: str) -> PairwiseDelta:
        for d in self.deltas:
            if (d.a, d.b) == (a, b):
                return d
            if (d.a, d.b) == (b, a):
                return PairwiseDelta(a, b, -d.delta_mean, -d.ci_high, -d.ci_low)
        raise KeyError(f"no delta for ({a}, {b})")

    def as_markdown(self) -> str:
        lines = [
            "| policy | mean return | sd | 95% CI | mastery | AI uses | seconds | n |",
            "|---|---|---|---|---|---|---|---|",
        ]
        for name in sorted(self.stats):
            s = self.stats[name]
            lines.append(
                f"| {name} | {s.mean_return:.4f} | {s.sd_return:.4f} "
                f"| [{s.ci_low:.4f}, {s.ci_high:.4f}] | {s.mean_overall_mastery:.4f} "
                f"| {s.mean_ai_use:.2f} | {s.mean_seconds:.1f} | {s.n} |"
            )
        lines.append("")
        lines.append("| pair | delta mean | 95% CI |")
        lines.append("|---|---|---|")
        for d in self.deltas:
            lines.append(
                f"| {d.a} - {d.b} | {d.delta_mean:.4f} | [{d.ci_low:.4f}, {d.ci_high:.4f}] |"
            )
        return "\n".join(lines) + "\n"


def evaluate_policies(policies: dict, app_config: AppConfig, n_episodes: int, seed: int) -> dict:
    """Run every policy over the same episode seeds; returns name -> metrics."""
    return {
        name: run_fixed_policy(
            policy,
            n_episodes,
            seed=seed,
            task_spec=app_config.tasks,
            reward_cfg=app_config.reward,
            student_setup=app_config.student,
        )
        for name, policy in policies.items()
    }


def compare(
    policies: dict,
    app_config: AppConfig,
    n_episodes: int,
    seed: int = 0,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> ComparisonReport:
    """Evaluate and compare a named policy set under common random numbers."""
    if n_episodes < 1:
        raise ValidationError("n_episodes >= 1")
    if n_episodes < 30:
        warnings.warn(
            f"n_episodes={n_episodes} < 30: bootstrap intervals will be unreliable",
            stacklevel=2,
        )
    per_policy = evaluate_policies(policies, app_config, n_episodes, seed)
    returns = {
        name: np.array([m.reward.total for m in metrics], dtype=np.float64)
        for name, metrics in per_policy.items()
    }
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 99]))
    stats = {}
    for name in sorted(per_policy):
        metrics = per_policy[name]
        r = returns[name]
        ci_low, ci_high = bootstrap_mean_ci(r, resamples, rng)
        mastery = np.array([m.final_mastery for m in metrics], dtype=np.float64)
        stats[name] = PolicyStats(
            name=name,
            n=n_episodes,
            mean_return=float(r.mean()),
            sd_return=float(r.std(ddof=1)) if n_episodes > 1 else 0.0,
            ci_low=ci_low,
            ci_high=ci_high,
            mean_mastery=tuple(float(x) for x in mastery.mean(axis=0)),
            mean_overall_mastery=float(mastery.mean()),
            mean_ai_use=float(np.mean([m.ai_use_count for m in metrics])),
            mean_seconds=float(np.mean([m.episode_seconds for m in metrics])),
            mean_questions=float(np.mean([m.questions_answered for m in metrics])),
        )
    deltas = []
    names = sorted(per_policy)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            d = returns[a] - returns[b]
            ci_low, ci_high = bootstrap_mean_ci(d, resamples, rng)
            deltas.append(
                PairwiseDelta(
                    a=a,
                    b=b,
                    delta_mean=float(returns[a].mean() - returns[b].mean()),
                    ci_low=ci_low,
                    ci_high=ci_high,
                )
            )
    return ComparisonReport(
        stats=stats, deltas=deltas, n_episodes=n_episodes, seed=int(seed), resamples=resamples
    )


def intervals_overlap(a: PolicyStats, b: PolicyStats) -> bool:
    return not (a.ci_low > b.ci_high or b.ci_low > a.ci_high)
