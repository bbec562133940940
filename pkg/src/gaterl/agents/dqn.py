"""Deep Q-learning: replay buffer, target network, epsilon-greedy collection."""

from __future__ import annotations

import numpy as np

from ..approx import Adam, FeedforwardApproximator
from ..domain import FEATURE_DIM, Action, featurize
from ..env import GateEnv, episode_seed
from ..errors import TrainingAbort, ValidationError
from .buffers import ReplayBuffer


def epsilon_at(step: int, cfg) -> float:
    """Linear anneal from epsilon_start to epsilon_end over the first
    epsilon_fraction share of the step budget, then flat."""
    span = max(1.0, cfg.epsilon_fraction * cfg.total_steps)
    frac = min(1.0, step / span)
    return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)


def dqn_loss_and_grads(net, target_net, batch, gamma):
    """TD(0) targets from the frozen target net; MSE on the taken action.

    y = r + gamma * max_a Q_target(s', a) * (1 - done); returns (loss,
    grads, mean-target) with gradients only on the Q(s, a) entries.
    """
    feats = batch["feats"]
    actions = batch["actions"]
    n = len(actions)
    if n == 0:
        raise ValidationError("empty batch")
    q_all, acts = net.forward_batch(feats)
    q = q_all["q"]
    rows = np.arange(n)
    q_sa = q[rows, actions]
    q_next = target_net.forward_batch(batch["next_feats"])[0]["q"]
    y = batch["rewards"] + gamma * np.max(q_next, axis=1) * (1.0 - batch["dones"])
    err = q_sa - y
    loss = float(np.mean(err**2))
    dq = np.zeros_like(q)
    dq[rows, actions] = 2.0 * err / n
    grads = net.backward(acts, {"q": dq})
    return loss, grads, float(np.mean(y))


class DqnTrainer:
    """Single-environment collection loop with periodic replay updates."""

    def __init__(self, app_config, seed: int):
        self.app = app_config
        self.cfg = app_config.training.dqn
        self.caps = app_config.training.features
        self.seed = int(seed)
        self.net = FeedforwardApproximator(
            FEATURE_DIM, app_config.training.hidden, {"q": 2}, seed=seed
        )
        self.target = self.net.copy()
        self.opt = Adam(self.net.parameters(), lr=self.cfg.lr, clip_norm=0.5)
        self.replay = ReplayBuffer(self.cfg.buffer_capacity, FEATURE_DIM)
        self.env = GateEnv(app_config.tasks, app_config.reward, app_config.student, seed=0)
        self.episode_counter = 0
        self._reset_env()
        self.act_rng = np.random.default_rng(np.random.SeedSequence([self.seed, 3]))
        self.sample_rng = np.random.default_rng(np.random.SeedSequence([self.seed, 7]))
        self.global_step = 0
        self.updates = 0
        self.bad_updates = 0
        self.completed: list = []

    def _reset_env(self) -> None:
        self.env.reset(episode_seed(self.seed, self.episode_counter))
        self.episode_counter += 1

    def act(self, feat: np.ndarray) -> int:
        eps = epsilon_at(self.global_step, self.cfg)
        if self.act_rng.random() < eps:
            return int(self.act_rng.integers(0, 2))
        q = self.net.forward(feat)["q"]
        return 1 if q[1] > q[0] else 0  # Deny wins ties

    def step(self) -> dict | None:
        """One env step plus (possibly) one update; returns diagnostics."""
        feat = featurize(self.env.observation(), self.caps, validate=False)
        action = self.act(feat)
        tr = self.env.step(Action(action))
        next_feat = featurize(tr.obs_after, self.caps, validate=False)
        self.replay.push(feat, action, tr.reward.total, next_feat, tr.terminal)
        if tr.terminal:
            self.completed.append(self.env.metrics())
            self._reset_env()
        self.global_step += 1
        diag = None
        if (
            self.global_step >= self.cfg.warmup_steps
            and self.global_step % self.cfg.train_every == 0
            and self.replay.size >= self.cfg.batch_size
        ):
            diag = self._update()
        return diag

    def _update(self) -> dict:
        batch = self.replay.sample(self.cfg.batch_size, self.sample_rng)
        loss, grads, mean_target = dqn_loss_and_grads(self.net, self.target, batch, self.cfg.gamma)
        if not np.isfinite(loss):
            self.bad_updates += 1
            if self.bad_updates >= 3:
                raise TrainingAbort(
                    f"dqn: 3 consecutive non-finite losses near step {self.global_step}"
                )
            return {"loss": loss, "epsilon": epsilon_at(self.global_step, self.cfg)}
        self.bad_updates = 0
        self.opt.step(self.net.parameters(), grads)
        self.updates += 1
        if self.updates % self.cfg.target_sync_every == 0:
            self.target.set_parameters([p.copy() for p in self.net.parameters()])
        return {
            "loss": loss,
            "mean_target": mean_target,
            "epsilon": epsilon_at(self.global_step, self.cfg),
        }

    def drain_completed(self) -> list:
        out = self.completed
        self.completed = []
        return out
