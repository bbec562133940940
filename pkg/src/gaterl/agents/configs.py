"""Hyperparameter records for the three agents. Plain data, validated."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PpoConfig:
    clip_epsilon: float = 0.2
    gamma: float = 0.99
    lam: float = 0.95
    epochs: int = 4
    minibatch_size: int = 256
    rollout_length: int = 4096
    value_weight: float = 0.5
    entropy_weight: float = 0.01
    lr: float = 3e-4
    total_steps: int = 300_000
    n_envs: int = 8  # independent env instances stepped in lockstep

    def violations(self, path: str = "training.ppo") -> list:
        v = []
        if not 0 < self.clip_epsilon < 1:
            v.append(f"{path}.clip_epsilon in (0,1)")
        if self.n_envs < 1 or self.rollout_length % max(self.n_envs, 1) != 0:
            v.append(f"{path}.n_envs >= 1 and divides rollout_length")
        if not 0 < self.gamma <= 1:
            v.append(f"{path}.gamma in (0,1]")
        if not 0 <= self.lam <= 1:
            v.append(f"{path}.lam in [0,1]")
        if self.epochs < 1:
            v.append(f"{path}.epochs >= 1")
        if not 0 < self.minibatch_size <= self.rollout_length:
            v.append(f"{path}.minibatch_size in (0, rollout_length]")
        if self.value_weight < 0 or self.entropy_weight < 0:
            v.append(f"{path}: loss weights >= 0")
        if self.lr <= 0:
            v.append(f"{path}.lr > 0")
        if self.total_steps < 0:
            v.append(f"{path}.total_steps >= 0")
        return v


@dataclass(frozen=True)
class DqnConfig:
    gamma: float = 0.99
    buffer_capacity: int = 50_000
    batch_size: int = 128
    train_every: int = 4
    warmup_steps: int = 1_000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_fraction: float = 0.2  # share of the budget spent annealing
    target_sync_every: int = 1_000  # in updates
    lr: float = 3e-4
    total_steps: int = 300_000

    def violations(self, path: str = "training.dqn") -> list:
        v = []
        if not 0 < self.gamma <= 1:
            v.append(f"{path}.gamma in (0,1]")
        if self.buffer_capacity < 1:
            v.append(f"{path}.buffer_capacity >= 1")
        if not 0 < self.batch_size <= self.buffer_capacity:
            v.append(f"{path}.batch_size in (0, buffer_capacity]")
        if self.train_every < 1:
            v.append(f"{path}.train_every >= 1")
        if self.warmup_steps < 0:
            v.append(f"{path}.warmup_steps >= 0")
        if not 0 <= self.epsilon_end <= self.epsilon_start <= 1:
            v.append(f"{path}: 0 <= epsilon_end <= epsilon_start <= 1")
        if not 0 < self.epsilon_fraction <= 1:
            v.append(f"{path}.epsilon_fraction in (0,1]")
        if self.target_sync_every < 1:
            v.append(f"{path}.target_sync_every >= 1")
        if self.lr <= 0:
            v.append(f"{path}.lr > 0")
        if self.total_steps < 0:
            v.append(f"{path}.total_steps >= 0")
        return v


@dataclass(frozen=True)
class A2cConfig:
    gamma: float = 0.99
    n_steps: int = 16
    value_weight: float = 0.5
    entropy_weight: float = 0.01
    lr: float = 3e-4
    total_steps: int = 300_000

    def violations(self, path: str = "training.a2c") -> list:
        v = []
        if not 0 < self.gamma <= 1:
            v.append(f"{path}.gamma in (0,1]")
        if self.n_steps < 1:
            v.append(f"{path}.n_steps >= 1")
        if self.value_weight < 0 or self.entropy_weight < 0:
            v.append(f"{path}: loss weights >= 0")
        if self.lr <= 0:
            v.append(f"{path}.lr > 0")
        if self.total_steps < 0:
            v.append(f"{path}.total_steps >= 0")
        return v
