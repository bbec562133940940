"""Command-line interface.

Subcommands: train, eval, heatmap, simulate, serve, reproduce, and
demo-checkpoint. Exit codes: 0 success, 2 validation problem (bad
arguments, bad config, unreadable checkpoint), 3 runtime abort. Log
verbosity comes from the GATERL_LOG environment variable (DEBUG, INFO,
WARNING, ERROR; default WARNING).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys

from .config import AppConfig, load_config, require_valid
from .errors import CheckpointError, GaterlError, TrainingAbort, UsageError, ValidationError

log = logging.getLogger("gaterl.cli")


def _setup_logging() -> None:
    level = os.environ.get("GATERL_LOG", "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _load_app_config(path) -> AppConfig:
    cfg = load_config(path) if path else AppConfig()
    return require_valid(cfg)


def parse_history(text: str) -> tuple:
    """'-' or '' is an empty history; otherwise one t/f (or 1/0) per task."""
    if text in ("", "-"):
        return ()
    out = []
    for ch in text:
        if ch in "tT1":
            out.append(True)
        elif ch in "fF0":
            out.append(False)
        else:
            raise ValidationError(f"history characters must be t/f/1/0, got {ch!r}")
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaterl",
        description="Reinforcement-learned gate over generative-AI assistance "
        "for simulated learners.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one agent and write its artifacts")
    p.add_argument("--agent", required=True, choices=("ppo", "dqn", "a2c"))
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("eval", help="evaluate a checkpoint (optionally vs baselines)")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--baselines", action="store_true", help="include always/never/random:0.5")
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", dest="json_out", default=None, help="also write report JSON here")

    p = sub.add_parser("heatmap", help="export the policy heatmap (CSV + SVG)")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--task", type=int, required=True, choices=(0, 1, 2))
    p.add_argument("--history", default="", help="per completed task: t/f chars, '-' for none")
    p.add_argument("--out", default=None, help="output base path (no extension)")
    p.add_argument("--config", default=None)

    p = sub.add_parser("simulate", help="run a fixed policy and print metrics")
    p.add_argument("--policy", required=True, help="always | never | random:P | checkpoint path")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None)
    p.add_argument("--log", dest="log_path", default=None, help="JSONL transition log (.gz ok)")

    p = sub.add_parser("serve", help="run the live gate service")
    p.add_argument("--checkpoint", default=None, help="checkpoint for rl sessions")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--config", default=None)

    p = sub.add_parser("reproduce", help="train all agents, compare, export reports")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seeds", default="0,1,2,3,4", help="comma-separated seed list")
    p.add_argument("--episodes", type=int, default=1000, help="comparison episodes")

    p = sub.add_parser("demo-checkpoint", help="write the hand-built threshold policy")
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=int, default=3)
    return parser


def _cmd_train(args) -> int:
    from .agents.train import train

    cfg = _load_app_config(args.config)
    result = train(args.agent, cfg, args.seed, args.out)
    print(
        json.dumps(
            {
                "agent": result.agent,
                "seed": result.seed,
                "steps": result.steps,
                "checkpoint": result.checkpoint_path,
                "curve": result.curve_path,
                "evals": result.evals_path,
                "final_greedy_mean_return": result.final_eval_mean,
            },
            indent=2,
        )
    )
    return 0


def _cmd_eval(args) -> int:
    from .agents.common import greedy_checkpoint_policy
    from .harness.compare import compare

    cfg = _load_app_config(args.config)
    policies = {"checkpoint": greedy_checkpoint_policy(args.checkpoint, cfg.training.features)}
    if args.baselines:
        policies.update({"always": "always", "never": "never", "random0.5": "random:0.5"})
    report = compare(policies, cfg, args.episodes, args.seed)
    if args.json_out:
        report.to_json(args.json_out)
    print(report.as_markdown())
    return 0


def _cmd_heatmap(args) -> int:
    from .harness.heatmap import export_heatmap

    cfg = _load_app_config(args.config)
    history = parse_history(args.history)
    base = args.out or f"heatmap_task{args.task}"
    paths = export_heatmap(args.checkpoint, args.task, history, base, cfg.training.features)
    print(json.dumps({"csv": paths["csv"], "svg": paths["svg"]}, indent=2))
    return 0


def _cmd_simulate(args) -> int:
    import numpy as np

    from .env import run_fixed_policy

    cfg = _load_app_config(args.config)
    metrics = run_fixed_policy(
        args.policy,
        args.episodes,
        seed=args.seed,
        task_spec=cfg.tasks,
        reward_cfg=cfg.reward,
        student_setup=cfg.student,
        log_path=args.log_path,
    )
    returns = [m.reward.total for m in metrics]
    summary = {
        "policy": args.policy,
        "episodes": args.episodes,
        "seed": args.seed,
        "mean_return": float(np.mean(returns)),
        "sd_return": float(np.std(returns, ddof=1)) if len(returns) > 1 else 0.0,
        "mean_components": {
            "success": float(np.mean([m.reward.success for m in metrics])),
            "time": float(np.mean([m.reward.time for m in metrics])),
            "mt": float(np.mean([m.reward.mt for m in metrics])),
            "pf": float(np.mean([m.reward.pf for m in metrics])),
            "clt": float(np.mean([m.reward.clt for m in metrics])),
        },
        "mean_final_mastery": float(np.mean([np.mean(m.final_mastery) for m in metrics])),
        "mean_ai_use": float(np.mean([m.ai_use_count for m in metrics])),
        "mean_episode_seconds": float(np.mean([m.episode_seconds for m in metrics])),
    }
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server.app import create_app

    cfg = _load_app_config(args.config)
    server_cfg = cfg.server
    if args.checkpoint:
        server_cfg = dataclasses.replace(server_cfg, checkpoint=args.checkpoint)
    if args.port is not None:
        server_cfg = dataclasses.replace(server_cfg, port=args.port)
    if args.host is not None:
        server_cfg = dataclasses.replace(server_cfg, host=args.host)
    cfg = dataclasses.replace(cfg, server=server_cfg)
    require_valid(cfg)
    app = create_app(cfg)
    log_level = os.environ.get("GATERL_LOG", "warning").lower()
    uvicorn.run(app, host=server_cfg.host, port=server_cfg.port, log_level=log_level)
    return 0


def _cmd_reproduce(args) -> int:
    from .harness.reproduce import reproduce

    cfg = _load_app_config(args.config)
    try:
        seeds = tuple(int(s) for s in args.seeds.split(",") if s.strip() != "")
    except ValueError as exc:
        raise ValidationError(f"bad --seeds list: {exc}") from exc
    if not seeds:
        raise ValidationError("--seeds must name at least one seed")
    manifest = reproduce(cfg, args.out, seeds=seeds, n_compare_episodes=args.episodes)
    print(json.dumps({"manifest": manifest["manifest_path"]}, indent=2))
    return 0


def _cmd_demo_checkpoint(args) -> int:
    from .demo import save_demo_checkpoint

    path = save_demo_checkpoint(args.out, threshold=args.threshold)
    print(json.dumps({"checkpoint": path, "threshold": args.threshold}, indent=2))
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "heatmap": _cmd_heatmap,
    "simulate": _cmd_simulate,
    "serve": _cmd_serve,
    "reproduce": _cmd_reproduce,
    "demo-checkpoint": _cmd_demo_checkpoint,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, UsageError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingAbort as exc:
        print(f"training aborted: {exc}", file=sys.stderr)
        return 3
    except GaterlError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
