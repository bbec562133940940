"""Trajectory storage: on-policy rollout grid and uniform replay ring."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError


def gae_advantages(rewards, values, terminals, gamma, lam, bootstrap_value=0.0):
    """Generalized advantage estimation over time-major arrays.

    Accepts (T,) vectors or (T, E) grids of E independent environments.
    delta_t = r_t + gamma*v_{t+1}*(1-done_t) - v_t, with v_{T} replaced by
    `bootstrap_value` (scalar or (E,)); A_t = delta_t + gamma*lam*(1-done_t)
    *A_{t+1}. Returns (advantages, returns) with returns = A + v.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    terminals = np.asarray(terminals, dtype=bool)
    if not (rewards.shape == values.shape == terminals.shape):
        raise ValidationError("rewards/values/terminals shapes must match")
    T = rewards.shape[0]
    adv = np.zeros_like(rewards)
    nonterm = 1.0 - terminals.astype(np.float64)
    tail = rewards.shape[1:]
    last = np.zeros(tail)
    v_next = np.broadcast_to(np.asarray(bootstrap_value, dtype=np.float64), tail).astype(
        np.float64
    )
    for t in range(T - 1, -1, -1):
        delta = rewards[t] + gamma * v_next * nonterm[t] - values[t]
        last = delta + gamma * lam * nonterm[t] * last
        adv[t] = last
        v_next = values[t]
    return adv, adv + values


class RolloutBuffer:
    """Fixed-length on-policy storage for T steps of E parallel envs."""

    def __init__(self, n_steps: int, n_envs: int, feat_dim: int):
        self.n_steps = n_steps
        self.n_envs = n_envs
        self.feats = np.zeros((n_steps, n_envs, feat_dim))
        self.actions = np.zeros((n_steps, n_envs), dtype=np.int64)
        self.logps = np.zeros((n_steps, n_envs))
        self.values = np.zeros((n_steps, n_envs))
        self.rewards = np.zeros((n_steps, n_envs))
        self.terminals = np.zeros((n_steps, n_envs), dtype=bool)
        self.t = 0
        self.advantages = None
        self.raw_advantages = None
        self.returns = None

    @property
    def size(self) -> int:
        return self.t * self.n_envs

    def add(self, feats, actions, logps, values, rewards, terminals) -> None:
        if self.t >= self.n_steps:
            raise ValidationError("rollout buffer is full")
        i = self.t
        self.feats[i] = feats
        self.actions[i] = actions
        self.logps[i] = logps
        self.values[i] = values
        self.rewards[i] = rewards
        self.terminals[i] = terminals
        self.t = i + 1

    def compute(self, gamma, lam, bootstrap_values) -> None:
        """Fill advantages (normalized per batch) and returns."""
        if self.t != self.n_steps:
            raise ValidationError("rollout buffer not full")
        adv, ret = gae_advantages(
            self.rewards, self.values, self.terminals, gamma, lam, bootstrap_values
        )
        if not np.all(np.isfinite(adv)):
            raise ValidationError("non-finite advantages in rollout")
        self.raw_advantages = adv.reshape(-1)
        std = self.raw_advantages.std()
        centered = self.raw_advantages - self.raw_advantages.mean()
        self.advantages = centered / (std + 1e-8)
        self.returns = ret.reshape(-1)

    def flat(self) -> dict:
        n = self.size
        return {
            "feats": self.feats.reshape(n, -1),
            "actions": self.actions.reshape(n),
            "logps": self.logps.reshape(n),
            "values": self.values.reshape(n),
            "advantages": self.advantages,
            "returns": self.returns,
        }

    def minibatches(self, size: int, rng: np.random.Generator):
        """Yield index arrays covering a fresh shuffle of the batch."""
        order = rng.permutation(self.size)
        for start in range(0, self.size, size):
            yield order[start : start + size]

    def reset(self) -> None:
        self.t = 0
        self.advantages = None
        self.raw_advantages = None
        self.returns = None


class ReplayBuffer:
    """Uniform-sampling ring buffer of one-step transitions."""

    def __init__(self, capacity: int, feat_dim: int):
        if capacity < 1:
            raise ValidationError("replay capacity >= 1")
        self.capacity = capacity
        self.feats = np.zeros((capacity, feat_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.next_feats = np.zeros((capacity, feat_dim))
        self.dones = np.zeros(capacity, dtype=bool)
        self.pos = 0
        self.size = 0

    def push(self, feat, action, reward, next_feat, done) -> None:
        i = self.pos
        self.feats[i] = feat
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_feats[i] = next_feat
        self.dones[i] = done
        self.pos = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        if self.size == 0:
            raise ValidationError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, self.size, size=batch_size)
        return {
            "feats": self.feats[idx],
            "actions": self.actions[idx],
            "rewards": self.rewards[idx],
            "next_feats": self.next_feats[idx],
            "dones": self.dones[idx],
        }
