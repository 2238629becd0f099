"""High-level experiment orchestration: training runs, artifacts, priority study."""

from __future__ import annotations

import math
import os

import numpy as np

from .config import ExperimentConfig
from .dqn.trainer import encode_observation, run_training
from .nn import autodiff as ad
from .nn.networks import QNetwork, save_checkpoint
from .runio import (
    CHECKPOINT_NAME,
    MANIFEST_NAME,
    METRICS_NAME,
    build_manifest,
    run_dir,
    write_json_atomic,
    write_metrics_csv,
)
from .sim.env import EgoAction, IntersectionEnv, TrajectoryRecorder

CENTER_RADIUS = 8.0  # m: "reached the intersection center" threshold for yields


def train_run(
    config: ExperimentConfig,
    seed: int,
    dest: str | None = None,
    episodes: int | None = None,
) -> str:
    """Train one agent for one seed and write checkpoint/metrics/manifest."""
    env_cfg = config.env_config()
    train_cfg = config.train_config(seed, episodes)
    model, metrics = run_training(env_cfg, config.agent_kind, train_cfg, config.attention_config())

    out = dest or run_dir(config.out_dir, config.agent_kind, seed)
    os.makedirs(out, exist_ok=True)
    save_checkpoint(model, os.path.join(out, CHECKPOINT_NAME), config.config_hash())
    write_metrics_csv(os.path.join(out, METRICS_NAME), metrics)
    write_json_atomic(os.path.join(out, MANIFEST_NAME), build_manifest(config, seed))
    return out


def run_matrix(
    config: ExperimentConfig,
    out_dir: str | None = None,
    kinds: tuple[str, ...] | None = None,
    seeds: tuple[int, ...] | None = None,
    episodes: int | None = None,
    progress=None,
) -> list[str]:
    """Train every (agent kind, seed) combination sequentially."""
    out = out_dir or config.out_dir
    dirs = []
    for kind in kinds or (config.agent_kind,):
        kind_config = config.with_overrides(agent__kind=kind)
        for seed in seeds or config.seeds:
            if progress is not None:
                progress(kind, seed)
            dirs.append(train_run(kind_config, seed, dest=run_dir(out, kind, seed), episodes=episodes))
    return dirs


# ------------------------------------------------------------- priority study


def _first_entry_times(recorder: TrajectoryRecorder, radius: float) -> dict[int, float]:
    """vid -> first time within `radius` of the intersection center."""
    first: dict[int, float] = {}
    for time, vid, x, y, *_ in recorder.rows:
        if vid not in first and math.hypot(x, y) <= radius:
            first[vid] = time
    return first


def _episode_yielded(recorder: TrajectoryRecorder) -> bool:
    """True when some scripted vehicle reached the center before the ego did.

    An ego that never reaches the center while conflicting traffic does counts
    as having yielded; an episode with no conflicting traffic does not.
    """
    entries = _first_entry_times(recorder, CENTER_RADIUS)
    t_ego = entries.get(0, math.inf)
    others = [t for vid, t in entries.items() if vid != 0]
    return any(t < t_ego for t in others)


def greedy_episode(
    model: QNetwork, env: IntersectionEnv, seed: int
) -> tuple[float, float, bool, TrajectoryRecorder]:
    """One greedy rollout: (return, mean ego speed, yielded, trajectory)."""
    recorder = TrajectoryRecorder()
    scene = env.reset(seed)
    recorder.snapshot(scene)
    ep_return = 0.0
    speeds = []
    while True:
        obs = encode_observation(model.kind, scene)
        with ad.no_grad():
            if model.kind == "ego_attention":
                out, _ = model.forward_batch(obs[None, ...], (obs[:, 0] > 0)[None, ...])
            else:
                out, _ = model.forward_batch(obs[None, ...])
        outcome = env.step(scene, EgoAction(int(np.argmax(out.data[0]))), recorder)
        ep_return += outcome.reward
        speeds.append(outcome.next_scene.ego.v)
        scene = outcome.next_scene
        if outcome.terminal:
            break
    return ep_return, float(np.mean(speeds)), _episode_yielded(recorder), recorder


def evaluate_yielding(
    model: QNetwork, env: IntersectionEnv, episode_seeds: list[int]
) -> dict:
    returns, speeds, yields = [], [], []
    for seed in episode_seeds:
        ep_return, speed, yielded, _ = greedy_episode(model, env, seed)
        returns.append(ep_return)
        speeds.append(speed)
        yields.append(yielded)
    return {
        "episodes": len(episode_seeds),
        "mean_return": float(np.mean(returns)),
        "mean_speed": float(np.mean(speeds)),
        "yield_frequency": float(np.mean(yields)),
    }


def frozen_scene_seeds(count: int, base_seed: int = 424242) -> list[int]:
    rng = np.random.default_rng(np.random.SeedSequence(base_seed))
    return [int(s) for s in rng.integers(0, 2**31 - 1, size=count)]


def priority_study(
    config: ExperimentConfig,
    out_dir: str | None = None,
    episodes: int | None = None,
    eval_episodes: int = 100,
    progress=None,
) -> dict:
    """Train two agents differing only in ego right-of-way; evaluate both on a
    frozen initial-scene set and report crossing speed and yield frequency."""
    from .nn.networks import load_checkpoint

    out = out_dir or config.out_dir
    arms = {"non_priority": False, "priority": True}
    seed = config.seeds[0]
    eval_seeds = frozen_scene_seeds(eval_episodes)

    report: dict = {"arms": {}, "seed": seed, "eval_episodes": eval_episodes}
    for arm, flag in arms.items():
        arm_config = config.with_overrides(env__ego_priority=flag)
        dest = os.path.join(out, "priority_study", arm)
        if progress is not None:
            progress(arm, seed)
        checkpoint = os.path.join(dest, CHECKPOINT_NAME)
        if not os.path.exists(checkpoint):
            train_run(arm_config, seed, dest=dest, episodes=episodes)
        model, _ = load_checkpoint(checkpoint)
        env = IntersectionEnv(arm_config.env_config())
        stats = evaluate_yielding(model, env, eval_seeds)
        report["arms"][arm] = stats

    write_json_atomic(os.path.join(out, "priority_study", "report.json"), report)
    return report
