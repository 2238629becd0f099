"""Command-line front door: train, evaluate, render, compare, priority-study.

Exit codes: 0 success, 2 configuration error, 3 runtime abort (non-finite
training loss), 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .compare import compare_report
from .config import default_config, parse_config
from .dqn.trainer import evaluate
from .errors import ConfigError, NumericalError, TrainingDiverged, UsageError
from .experiments import priority_study, run_matrix, train_run
from .nn.networks import load_checkpoint
from .render import rollout_frames, save_frames
from .runio import run_dir
from .sim.env import IntersectionEnv, TrajectoryRecorder

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _load_config(args):
    if getattr(args, "config", None):
        return parse_config(args.config)
    return default_config()


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="experiment config file (key = value lines)")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--episodes", type=int, help="episode-count override")


def _cmd_train(args) -> int:
    config = _load_config(args)
    out = args.out or config.out_dir
    seeds = (args.seed,) if args.seed is not None else config.seeds
    for seed in seeds:
        print(f"training {config.agent_kind} seed {seed} ...", flush=True)
        dest = train_run(config, seed, dest=run_dir(out, config.agent_kind, seed), episodes=args.episodes)
        print(f"artifacts written to {dest}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    config = _load_config(args)
    model, header = load_checkpoint(args.checkpoint)
    summary = evaluate(
        model,
        config.env_config(),
        episodes=args.episodes or 100,
        seed=args.seed if args.seed is not None else 0,
    )
    print(json.dumps({"checkpoint": args.checkpoint, "model_kind": header["model_kind"], **summary.as_dict()}, indent=2))
    return EXIT_OK


def _cmd_render(args) -> int:
    config = _load_config(args)
    model, header = load_checkpoint(args.checkpoint)
    if header["model_kind"] != "ego_attention":
        print(
            f"warning: checkpoint kind {header['model_kind']!r} has no attention trace; "
            "rendering scenes only",
            file=sys.stderr,
        )
    env = IntersectionEnv(config.env_config())
    out = args.out or os.path.join(config.out_dir, "frames")
    recorder = TrajectoryRecorder()
    frames = rollout_frames(model, env, args.seed if args.seed is not None else 0, recorder)
    paths = save_frames(frames, out)
    recorder.write_csv(os.path.join(out, "trajectory.csv"))
    print(f"wrote {len(paths)} frames and trajectory.csv to {out}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    out = args.out or "comparison"
    result = compare_report(args.runs, out)
    for warning in result["warnings"]:
        print(f"warning: {warning}", file=sys.stderr)
    print(json.dumps(result["summary"], indent=2))
    print(f"curves and charts written to {out}")
    return EXIT_OK


def _cmd_priority_study(args) -> int:
    config = _load_config(args)
    report = priority_study(
        config,
        out_dir=args.out,
        episodes=args.episodes,
        progress=lambda arm, seed: print(f"training arm {arm} (seed {seed}) ...", flush=True),
    )
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _cmd_train_all(args) -> int:
    config = _load_config(args)
    kinds = tuple(args.agents.split(",")) if args.agents else ("fcn_list", "cnn_grid", "ego_attention")
    seeds = (args.seed,) if args.seed is not None else config.seeds
    dirs = run_matrix(
        config,
        out_dir=args.out,
        kinds=kinds,
        seeds=seeds,
        episodes=args.episodes,
        progress=lambda kind, seed: print(f"training {kind} seed {seed} ...", flush=True),
    )
    print("\n".join(dirs))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intersection-rl",
        description="Train and analyse intersection-crossing DQN agents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the configured agent, one run per seed")
    _add_common(p_train)
    p_train.set_defaults(func=_cmd_train)

    p_train_all = sub.add_parser("train-all", help="train several agent kinds across seeds")
    _add_common(p_train_all)
    p_train_all.add_argument("--agents", help="comma-separated agent kinds (default: all three)")
    p_train_all.set_defaults(func=_cmd_train_all)

    p_eval = sub.add_parser("evaluate", help="greedy evaluation of a checkpoint")
    _add_common(p_eval)
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_render = sub.add_parser("render", help="render one greedy episode to SVG frames")
    _add_common(p_render)
    p_render.add_argument("--checkpoint", required=True)
    p_render.set_defaults(func=_cmd_render)

    p_cmp = sub.add_parser("compare", help="aggregate runs into curves and charts")
    p_cmp.add_argument("runs", nargs="+", help="completed run directories")
    p_cmp.add_argument("--out", help="report directory (default: comparison)")
    p_cmp.set_defaults(func=_cmd_compare)

    p_prio = sub.add_parser(
        "priority-study", help="train right-of-way vs yielding agents and compare them"
    )
    _add_common(p_prio)
    p_prio.set_defaults(func=_cmd_priority_study)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrainingDiverged, NumericalError) as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
