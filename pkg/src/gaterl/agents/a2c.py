"""Advantage actor-critic: short n-step rollouts, one update per rollout."""

from __future__ import annotations

import numpy as np

from ..approx import Adam, FeedforwardApproximator
from ..domain import FEATURE_DIM, Action, featurize
from ..env import GateEnv, episode_seed
from ..errors import TrainingAbort, ValidationError
from .buffers import gae_advantages
from .common import log_softmax


def a2c_loss_and_grads(net, feats, actions, rewards, terminals, bootstrap_value, cfg):
    """n-step advantage actor-critic loss with analytic gradients.

    Advantage = n-step bootstrapped return - v(s) (GAE with lambda = 1);
    loss = -mean(logpi(a|s) * A) + value_weight * mean((v - R)^2)
    - entropy_weight * mean(entropy). Advantages are treated as constants
    (no gradient through the critic in the policy term).
    """
    n = len(actions)
    if n == 0:
        raise ValidationError("empty rollout")
    outputs, acts = net.forward_batch(feats)
    logits = outputs["policy"]
    values = outputs["value"][:, 0]
    adv, returns = gae_advantages(rewards, values, terminals, cfg.gamma, 1.0, bootstrap_value)
    logp_all = log_softmax(logits)
    probs = np.exp(logp_all)
    rows = np.arange(n)
    logp_a = logp_all[rows, actions]
    policy_loss = -float(np.mean(logp_a * adv))
    value_err = values - returns
    value_loss = float(np.mean(value_err**2))
    entropy = -np.sum(probs * logp_all, axis=1)
    entropy_mean = float(np.mean(entropy))
    loss = policy_loss + cfg.value_weight * value_loss - cfg.entropy_weight * entropy_mean

    onehot = np.zeros_like(probs)
    onehot[rows, actions] = 1.0
    dz = (-adv[:, None] / n) * (onehot - probs)
    dz += (cfg.entropy_weight / n) * probs * (logp_all + entropy[:, None])
    # Returns depend on v only through the advantage, which is constant
    # here, so the value path differentiates (v - R)^2 with R fixed.
    dv = (2.0 * cfg.value_weight / n) * value_err[:, None]
    grads = net.backward(acts, {"policy": dz, "value": dv})
    diag = {
        "loss": loss,
        "policy_loss": policy_loss,
        "value_loss": value_loss,
        "entropy": entropy_mean,
    }
    return diag, grads


class A2cTrainer:
    """Single env, cfg.n_steps transitions per update."""

    def __init__(self, app_config, seed: int):
        self.app = app_config
        self.cfg = app_config.training.a2c
        self.caps = app_config.training.features
        self.seed = int(seed)
        self.net = FeedforwardApproximator(
            FEATURE_DIM, app_config.training.hidden, {"policy": 2, "value": 1}, seed=seed
        )
        self.opt = Adam(self.net.parameters(), lr=self.cfg.lr, clip_norm=0.5)
        self.env = GateEnv(app_config.tasks, app_config.reward, app_config.student, seed=0)
        self.episode_counter = 0
        self._reset_env()
        self.act_rng = np.random.default_rng(np.random.SeedSequence([self.seed, 3]))
        self.global_step = 0
        self.bad_updates = 0
        self.completed: list = []

    def _reset_env(self) -> None:
        self.env.reset(episode_seed(self.seed, self.episode_counter))
        self.episode_counter += 1

    def rollout_and_update(self) -> dict:
        """Collect cfg.n_steps transitions, then apply one gradient step."""
        n = self.cfg.n_steps
        feats = np.zeros((n, FEATURE_DIM))
        actions = np.zeros(n, dtype=np.int64)
        rewards = np.zeros(n)
        terminals = np.zeros(n, dtype=bool)
        for t in range(n):
            feat = featurize(self.env.observation(), self.caps, validate=False)
            logits = self.net.forward(feat)["policy"]
            logp = log_softmax(logits)
            action = 0 if self.act_rng.random() < np.exp(logp[0]) else 1
            tr = self.env.step(Action(action))
            feats[t] = feat
            actions[t] = action
            rewards[t] = tr.reward.total
            terminals[t] = tr.terminal
            if tr.terminal:
                self.completed.append(self.env.metrics())
                self._reset_env()
            self.global_step += 1
        last_feat = featurize(self.env.observation(), self.caps, validate=False)
        bootstrap = float(self.net.forward(last_feat)["value"][0])
        diag, grads = a2c_loss_and_grads(
            self.net, feats, actions, rewards, terminals, bootstrap, self.cfg
        )
        if not np.isfinite(diag["loss"]):
            self.bad_updates += 1
            if self.bad_updates >= 3:
                raise TrainingAbort(
                    f"a2c: 3 consecutive non-finite losses near step {self.global_step}"
                )
            return diag
        self.bad_updates = 0
        self.opt.step(self.net.parameters(), grads)
        return diag

    def drain_completed(self) -> list:
        out = self.completed
        self.completed = []
        return out
