"""Training dispatcher: runs one agent to its step budget, writes the
training-curve CSV, periodic greedy evaluations, and a final checkpoint."""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass

import numpy as np

from ..approx import save_checkpoint
from ..config import AppConfig, config_hash, require_valid
from ..env import run_fixed_policy
from ..errors import ValidationError
from .a2c import A2cTrainer
from .common import GreedyPolicy
from .dqn import DqnTrainer
from .ppo import PpoTrainer

log = logging.getLogger("gaterl.train")

AGENTS = ("ppo", "dqn", "a2c")

# Evaluation episodes draw from a seed namespace disjoint from training.
EVAL_SEED_OFFSET = 2**31

CURVE_COLUMNS = {
    "ppo": ["step", "mean_return", "success", "time", "mt", "pf", "clt", "clip_fraction", "kl"],
    "dqn": ["step", "mean_return", "success", "time", "mt", "pf", "clt", "epsilon"],
    "a2c": ["step", "mean_return", "success", "time", "mt", "pf", "clt"],
}


@dataclass
class TrainResult:
    agent: str
    seed: int
    steps: int
    checkpoint_path: str
    curve_path: str
    evals_path: str
    final_eval_mean: float


def greedy_eval(net, app_config: AppConfig, n_episodes: int, seed: int):
    """Deterministic-policy evaluation on held-out episode seeds."""
    policy = GreedyPolicy(net, app_config.training.features)
    return run_fixed_policy(
        policy,
        n_episodes,
        seed=seed,
        task_spec=app_config.tasks,
        reward_cfg=app_config.reward,
        student_setup=app_config.student,
    )


def _summarize(metrics) -> dict:
    if not metrics:
        return {k: "" for k in ("mean_return", "success", "time", "mt", "pf", "clt")}
    return {
        "mean_return": float(np.mean([m.reward.total for m in metrics])),
        "success": float(np.mean([m.reward.success for m in metrics])),
        "time": float(np.mean([m.reward.time for m in metrics])),
        "mt": float(np.mean([m.reward.mt for m in metrics])),
        "pf": float(np.mean([m.reward.pf for m in metrics])),
        "clt": float(np.mean([m.reward.clt for m in metrics])),
    }


def _write_csv(path, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in columns})


def train(agent: str, app_config: AppConfig, seed: int, out_dir) -> TrainResult:
    """Train `agent` from scratch; artifacts land in `out_dir`.

    Files written: curve.csv (training curve), evals.csv (periodic greedy
    evaluations), checkpoint.json (final parameters + optimizer + rng).
    """
    if agent not in AGENTS:
        raise ValidationError(f"unknown agent {agent!r}; expected one of {AGENTS}")
    require_valid(app_config)
    os.makedirs(out_dir, exist_ok=True)
    training = app_config.training
    eval_seed = EVAL_SEED_OFFSET + int(seed)
    curve_rows: list = []
    eval_rows: list = []

    def run_eval(net, step) -> float:
        metrics = greedy_eval(net, app_config, training.eval_episodes, eval_seed)
        mean = float(np.mean([m.reward.total for m in metrics]))
        eval_rows.append({"step": step, "greedy_mean_return": mean})
        log.info("%s seed %d step %d greedy eval %.3f", agent, seed, step, mean)
        return mean

    if agent == "ppo":
        trainer = PpoTrainer(app_config, seed)
        budget = training.ppo.total_steps
        next_eval = training.eval_every_steps
        while trainer.global_step < budget:
            trainer.collect_rollout()
            diag = trainer.update()
            row = {"step": trainer.global_step}
            row.update(_summarize(trainer.drain_completed()))
            row["clip_fraction"] = diag.get("clip_fraction", "")
            row["kl"] = diag.get("approx_kl", "")
            curve_rows.append(row)
            if trainer.global_step >= next_eval:
                run_eval(trainer.net, trainer.global_step)
                next_eval += training.eval_every_steps
    elif agent == "dqn":
        trainer = DqnTrainer(app_config, seed)
        budget = training.dqn.total_steps
        next_eval = training.eval_every_steps
        next_row = 4096
        last_diag: dict = {}
        while trainer.global_step < budget:
            diag = trainer.step()
            if diag:
                last_diag = diag
            if trainer.global_step >= next_row:
                row = {"step": trainer.global_step}
                row.update(_summarize(trainer.drain_completed()))
                row["epsilon"] = last_diag.get(
                    "epsilon", app_config.training.dqn.epsilon_start
                )
                curve_rows.append(row)
                next_row += 4096
            if trainer.global_step >= next_eval:
                run_eval(trainer.net, trainer.global_step)
                next_eval += training.eval_every_steps
    else:
        trainer = A2cTrainer(app_config, seed)
        budget = training.a2c.total_steps
        next_eval = training.eval_every_steps
        next_row = 4096
        while trainer.global_step < budget:
            trainer.rollout_and_update()
            if trainer.global_step >= next_row:
                row = {"step": trainer.global_step}
                row.update(_summarize(trainer.drain_completed()))
                curve_rows.append(row)
                next_row += 4096
            if trainer.global_step >= next_eval:
                run_eval(trainer.net, trainer.global_step)
                next_eval += training.eval_every_steps

    final_mean = run_eval(trainer.net, trainer.global_step)
    curve_path = os.path.join(out_dir, "curve.csv")
    evals_path = os.path.join(out_dir, "evals.csv")
    ckpt_path = os.path.join(out_dir, "checkpoint.json")
    _write_csv(curve_path, CURVE_COLUMNS[agent], curve_rows)
    _write_csv(evals_path, ["step", "greedy_mean_return"], eval_rows)
    save_checkpoint(
        trainer.net,
        ckpt_path,
        optimizer=trainer.opt,
        step=trainer.global_step,
        config_hash=config_hash(app_config),
        rng_state=trainer.act_rng.bit_generator.state,
    )
    return TrainResult(
        agent=agent,
        seed=int(seed),
        steps=trainer.global_step,
        checkpoint_path=ckpt_path,
        curve_path=curve_path,
        evals_path=evals_path,
        final_eval_mean=final_mean,
    )
