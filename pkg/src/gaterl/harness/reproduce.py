"""End-to-end reproduction: train all agents over seeds, compare against
baselines under common random numbers, export heatmaps, write a report."""

from __future__ import annotations

import json
import logging
import os

import numpy as np

from ..agents.common import greedy_checkpoint_policy
from ..agents.train import AGENTS, train
from ..config import AppConfig
from .compare import compare
from .heatmap import export_heatmap

log = logging.getLogger("gaterl.reproduce")

DEFAULT_SEEDS = (0, 1, 2, 3, 4)
COMPARE_SEED = 424242  # episode-seed namespace for the final comparison


def ranking_table(results: dict) -> dict:
    """Per-agent mean/sd/se of the final greedy returns across seeds."""
    out = {}
    for agent, runs in results.items():
        finals = np.array([r.final_eval_mean for r in runs], dtype=np.float64)
        out[agent] = {
            "per_seed": [float(x) for x in finals],
            "mean": float(finals.mean()),
            "sd": float(finals.std(ddof=1)) if len(finals) > 1 else 0.0,
            "se": float(finals.std(ddof=1) / np.sqrt(len(finals))) if len(finals) > 1 else 0.0,
        }
    return out


def reproduce(
    app_config: AppConfig,
    out_dir,
    seeds=DEFAULT_SEEDS,
    n_compare_episodes: int = 1000,
    resamples: int = 10_000,
) -> dict:
    """Train PPO/DQN/A2C over `seeds`, compare, export; returns a manifest."""
    os.makedirs(out_dir, exist_ok=True)
    results = {}
    for agent in AGENTS:
        runs = []
        for seed in seeds:
            run_dir = os.path.join(out_dir, agent, f"seed{seed}")
            log.info("training %s seed %d -> %s", agent, seed, run_dir)
            runs.append(train(agent, app_config, seed, run_dir))
        results[agent] = runs

    ranking = ranking_table(results)
    best = {
        agent: max(runs, key=lambda r: (r.final_eval_mean, -r.seed))
        for agent, runs in results.items()
    }

    caps = app_config.training.features
    policies = {
        agent: greedy_checkpoint_policy(best[agent].checkpoint_path, caps) for agent in AGENTS
    }
    policies.update({"always": "always", "never": "never", "random0.5": "random:0.5"})
    log.info("comparing %d policies over %d episodes", len(policies), n_compare_episodes)
    report = compare(policies, app_config, n_compare_episodes, COMPARE_SEED, resamples)
    report_json = os.path.join(out_dir, "comparison.json")
    report.to_json(report_json)

    heatmaps = []
    for task in (0, 1, 2):
        base = os.path.join(out_dir, f"heatmap_ppo_task{task}")
        paths = export_heatmap(
            best["ppo"].checkpoint_path, task, (False,) * task, base, caps
        )
        heatmaps.extend([paths["csv"], paths["svg"]])

    report_md = os.path.join(out_dir, "report.md")
    _write_report(report_md, seeds, ranking, report, heatmaps, results)

    manifest = {
        "seeds": list(seeds),
        "ranking": ranking,
        "best_checkpoints": {a: best[a].checkpoint_path for a in AGENTS},
        "curves": {a: [r.curve_path for r in results[a]] for a in AGENTS},
        "evals": {a: [r.evals_path for r in results[a]] for a in AGENTS},
        "comparison_json": report_json,
        "report_md": report_md,
        "heatmaps": heatmaps,
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    manifest["manifest_path"] = manifest_path
    return manifest


def _one_se_line(ranking: dict, other: str) -> str:
    ok = ranking["ppo"]["mean"] >= ranking[other]["mean"] - ranking[other]["se"]
    verdict = "holds" if ok else "DOES NOT HOLD"
    return (
        f"- PPO mean ({ranking['ppo']['mean']:.4f}) >= {other.upper()} mean - 1 SE "
        f"({ranking[other]['mean']:.4f} - {ranking[other]['se']:.4f}): {verdict}"
    )


def _write_report(path, seeds, ranking, report, heatmaps, results) -> None:
    lines = [
        "# Reproduction report",
        "",
        f"Agents trained per seed list {list(seeds)}; policies compared on "
        f"{report.n_episodes} common-seed episodes with {report.resamples} bootstrap "
        "resamples.",
        "",
        "## Algorithm ranking (final greedy evaluation, mean over seeds)",
        "",
        "| agent | mean return | sd | se | per-seed returns |",
        "|---|---|---|---|---|",
    ]
    for agent in sorted(ranking):
        r = ranking[agent]
        per_seed = ", ".join(f"{x:.4f}" for x in r["per_seed"])
        lines.append(
            f"| {agent} | {r['mean']:.4f} | {r['sd']:.4f} | {r['se']:.4f} | {per_seed} |"
        )
    lines += [
        "",
        "Soft ranking check (no quantitative margin is established for this "
        "comparison; one standard error is this artifact's convention):",
        "",
        _one_se_line(ranking, "dqn"),
        _one_se_line(ranking, "a2c"),
        "",
        "## Policy comparison (common random numbers)",
        "",
        report.as_markdown(),
        "## Heatmaps",
        "",
    ]
    lines += [f"- {p}" for p in heatmaps]
    lines += ["", "## Training artifacts", ""]
    for agent in sorted(results):
        for run in results[agent]:
            lines.append(f"- {run.curve_path}")
            lines.append(f"- {run.checkpoint_path}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
