"""Proximal policy optimization with a clipped surrogate objective.

The loss and its gradient with respect to the policy logits and value
output are derived by hand (the surrogate's min() gates the gradient to
samples where the unclipped branch is active), then pushed through the
network's analytic backward pass.
"""

from __future__ import annotations

import numpy as np

from ..approx import Adam, FeedforwardApproximator
from ..domain import FEATURE_DIM, Action, featurize
from ..env import GateEnv, episode_seed
from ..errors import NumericError, ValidationError
from .buffers import RolloutBuffer
from .common import log_softmax


def ppo_loss_and_grads(net, feats, actions, old_logps, advantages, returns, cfg):
    """One minibatch loss with diagnostics and parameter gradients.

    Loss = -mean(min(rho*A, clip(rho)*A)) + value_weight*mean((v-R)^2)
           - entropy_weight*mean(entropy).
    Diagnostics: clip_fraction, approx KL mean(rho - 1 - log(rho)) >= 0,
    entropy, and the three loss terms.
    """
    n = len(actions)
    if n == 0:
        raise ValidationError("empty minibatch")
    outputs, acts = net.forward_batch(feats)
    logits = outputs["policy"]
    values = outputs["value"][:, 0]
    logp_all = log_softmax(logits)
    probs = np.exp(logp_all)
    rows = np.arange(n)
    logp_a = logp_all[rows, actions]
    log_ratio = logp_a - old_logps
    ratio = np.exp(log_ratio)
    if not np.all(np.isfinite(ratio)):
        bad = int(np.flatnonzero(~np.isfinite(ratio))[0])
        raise NumericError(f"non-finite probability ratio at sample {bad}")
    lo, hi = 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon
    clipped = np.clip(ratio, lo, hi)
    surr_raw = ratio * advantages
    surr_clip = clipped * advantages
    take_raw = surr_raw <= surr_clip  # min(); ties keep the raw branch
    policy_loss = -float(np.mean(np.minimum(surr_raw, surr_clip)))
    value_err = values - returns
    value_loss = float(np.mean(value_err**2))
    entropy = -np.sum(probs * logp_all, axis=1)
    entropy_mean = float(np.mean(entropy))
    loss = policy_loss + cfg.value_weight * value_loss - cfg.entropy_weight * entropy_mean

    # d(policy_loss)/d(logits): gradient flows only through the raw branch.
    coef = np.where(take_raw, advantages, 0.0) * ratio  # d(surr)/d(logp_a)
    onehot = np.zeros_like(probs)
    onehot[rows, actions] = 1.0
    dz = (-coef[:, None] / n) * (onehot - probs)
    dz += (cfg.entropy_weight / n) * probs * (logp_all + entropy[:, None])
    dv = (2.0 * cfg.value_weight / n) * value_err[:, None]
    grads = net.backward(acts, {"policy": dz, "value": dv})

    diag = {
        "loss": loss,
        "policy_loss": policy_loss,
        "value_loss": value_loss,
        "entropy": entropy_mean,
        "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > cfg.clip_epsilon)),
        "approx_kl": float(np.mean(ratio - 1.0 - log_ratio)),
    }
    return diag, grads


class PpoTrainer:
    """Vectorized rollout collection plus epoch/minibatch updates."""

    def __init__(self, app_config, seed: int):
        self.app = app_config
        self.cfg = app_config.training.ppo
        self.caps = app_config.training.features
        self.seed = int(seed)
        self.net = FeedforwardApproximator(
            FEATURE_DIM, app_config.training.hidden, {"policy": 2, "value": 1}, seed=seed
        )
        self.opt = Adam(self.net.parameters(), lr=self.cfg.lr, clip_norm=0.5)
        self.n_envs = self.cfg.n_envs
        self.horizon = self.cfg.rollout_length // self.n_envs
        self.envs = [
            GateEnv(app_config.tasks, app_config.reward, app_config.student, seed=0)
            for _ in range(self.n_envs)
        ]
        self.episode_counter = 0
        for env in self.envs:
            self._reset_env(env)
        self.act_rng = np.random.default_rng(np.random.SeedSequence([self.seed, 3]))
        self.update_rng = np.random.default_rng(np.random.SeedSequence([self.seed, 7]))
        self.buf = RolloutBuffer(self.horizon, self.n_envs, FEATURE_DIM)
        self.global_step = 0
        self.bad_updates = 0
        self.completed: list = []  # EpisodeMetrics since last drain

    def _reset_env(self, env) -> None:
        env.reset(episode_seed(self.seed, self.episode_counter))
        self.episode_counter += 1

    def _features(self) -> np.ndarray:
        return np.stack(
            [featurize(env.observation(), self.caps, validate=False) for env in self.envs]
        )

    def collect_rollout(self) -> None:
        self.buf.reset()
        rows = np.arange(self.n_envs)
        for _ in range(self.horizon):
            feats = self._features()
            outputs, _ = self.net.forward_batch(feats)
            logp_all = log_softmax(outputs["policy"])
            values = outputs["value"][:, 0]
            p_deny = np.exp(logp_all[:, 0])
            actions = (self.act_rng.random(self.n_envs) >= p_deny).astype(np.int64)
            logps = logp_all[rows, actions]
            rewards = np.zeros(self.n_envs)
            terminals = np.zeros(self.n_envs, dtype=bool)
            for j, env in enumerate(self.envs):
                tr = env.step(Action(int(actions[j])))
                rewards[j] = tr.reward.total
                terminals[j] = tr.terminal
                if tr.terminal:
                    self.completed.append(env.metrics())
                    self._reset_env(env)
            self.buf.add(feats, actions, logps, values, rewards, terminals)
            self.global_step += self.n_envs
        bootstrap = self.net.forward_batch(self._features())[0]["value"][:, 0]
        self.buf.compute(self.cfg.gamma, self.cfg.lam, bootstrap)

    def update(self) -> dict:
        """Run the epoch/minibatch sweep; returns mean diagnostics."""
        flat = self.buf.flat()
        sums: dict = {}
        count = 0
        for _ in range(self.cfg.epochs):
            for idx in self.buf.minibatches(self.cfg.minibatch_size, self.update_rng):
                try:
                    diag, grads = ppo_loss_and_grads(
                        self.net,
                        flat["feats"][idx],
                        flat["actions"][idx],
                        flat["logps"][idx],
                        flat["advantages"][idx],
                        flat["returns"][idx],
                        self.cfg,
                    )
                except NumericError as exc:
                    self._register_bad(str(exc))
                    continue
                if not np.isfinite(diag["loss"]):
                    self._register_bad(f"loss={diag['loss']!r}")
                    continue
                self.bad_updates = 0
                self.opt.step(self.net.parameters(), grads)
                for k, v in diag.items():
                    sums[k] = sums.get(k, 0.0) + v
                count += 1
        return {k: v / count for k, v in sums.items()} if count else {}

    def _register_bad(self, detail: str) -> None:
        from ..errors import TrainingAbort

        self.bad_updates += 1
        if self.bad_updates >= 3:
            raise TrainingAbort(
                f"ppo: 3 consecutive non-finite losses near step {self.global_step} ({detail})"
            )

    def drain_completed(self) -> list:
        out = self.completed
        self.completed = []
        return out
