"""Agents: PPO (primary), DQN and A2C (comparison), shared action utils."""

from .a2c import A2cTrainer, a2c_loss_and_grads
from .buffers import ReplayBuffer, RolloutBuffer, gae_advantages
from .common import GreedyPolicy, act, greedy_action, greedy_checkpoint_policy, sample_action
from .configs import A2cConfig, DqnConfig, PpoConfig
from .dqn import DqnTrainer, dqn_loss_and_grads, epsilon_at
from .ppo import PpoTrainer, ppo_loss_and_grads
from .train import AGENTS, TrainResult, greedy_eval, train

__all__ = [
    "AGENTS",
    "A2cConfig",
    "A2cTrainer",
    "DqnConfig",
    "DqnTrainer",
    "GreedyPolicy",
    "PpoConfig",
    "PpoTrainer",
    "ReplayBuffer",
    "RolloutBuffer",
    "TrainResult",
    "a2c_loss_and_grads",
    "act",
    "dqn_loss_and_grads",
    "epsilon_at",
    "gae_advantages",
    "greedy_action",
    "greedy_checkpoint_policy",
    "greedy_eval",
    "ppo_loss_and_grads",
    "sample_action",
    "train",
]
