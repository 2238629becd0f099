"""DQN training loop: epsilon-greedy collection, TD regression, target syncing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, TrainingDiverged
from ..features import grid_observation, list_observation
from ..nn import autodiff as ad
from ..nn.networks import AttentionConfig, QNetwork, build_model
from ..sim.env import EgoAction, EnvConfig, IntersectionEnv, Scene
from .replay import ReplayBuffer, Transition


@dataclass(frozen=True)
class TrainConfig:
    gamma: float = 0.95
    learning_rate: float = 5e-4
    batch_size: int = 64
    target_sync: int = 50  # gradient steps between target-network copies
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int = 10_000  # decisions over which epsilon anneals
    episodes: int = 1000
    replay_capacity: int = 15_000
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError(f"gamma must be in [0, 1), got {self.gamma}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.target_sync < 1:
            raise ConfigError("target_sync must be at least 1")
        if self.epsilon_decay_steps < 1:
            raise ConfigError("epsilon_decay_steps must be at least 1")
        if self.episodes < 0:
            raise ConfigError("episodes must be non-negative")
        if self.replay_capacity < self.batch_size:
            raise ConfigError("replay_capacity must be at least batch_size")


@dataclass(frozen=True)
class EpsilonSchedule:
    start: float = 1.0
    end: float = 0.05
    decay_steps: int = 10_000

    def value(self, step: int) -> float:
        if step < 0:
            raise ValueError("step must be non-negative")
        if step >= self.decay_steps:
            return self.end
        frac = step / self.decay_steps
        return self.start + (self.end - self.start) * frac


def epsilon(step: int, schedule: EpsilonSchedule) -> float:
    """Exploration rate after the given number of decisions."""
    return schedule.value(step)


def encode_observation(kind: str, scene: Scene) -> np.ndarray:
    """The observation array each model kind trains on (padded where needed)."""
    if kind == "cnn_grid":
        return grid_observation(scene)
    return list_observation(scene, pad=True)[0]


def _batch_values(model: QNetwork, obs: np.ndarray) -> np.ndarray:
    """Inference-only Q-values for a stacked observation batch."""
    with ad.no_grad():
        if model.kind == "ego_attention":
            out, _ = model.forward_batch(obs, obs[:, :, 0] > 0)
        else:
            out, _ = model.forward_batch(obs)
    return out.data


def select_action(model: QNetwork, obs: np.ndarray, eps: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy action; greedy ties resolve to the lowest index."""
    if rng.random() < eps:
        return int(rng.integers(len(EgoAction)))
    values = _batch_values(model, obs[None, ...])[0]
    return int(np.argmax(values))


def td_targets(batch: list[Transition], target_model: QNetwork, gamma: float) -> np.ndarray:
    """One-step targets; terminal transitions never touch their next observation."""
    if not batch:
        raise ValueError("td_targets needs a non-empty batch")
    targets = np.array([t.reward for t in batch], dtype=np.float64)
    live = [i for i, t in enumerate(batch) if not t.terminal]
    if live:
        next_obs = np.stack([batch[i].next_obs for i in live])
        best = _batch_values(target_model, next_obs).max(axis=1)
        targets[live] += gamma * best
    return targets


class Adam:
    """Adam over a named parameter dict, applied in insertion order."""

    def __init__(self, params, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = {name: np.zeros_like(p.data) for name, p in params.items()}
        self._v = {name: np.zeros_like(p.data) for name, p in params.items()}

    def step(self) -> None:
        self.t += 1
        bias1 = 1.0 - self.beta1**self.t
        bias2 = 1.0 - self.beta2**self.t
        for name, p in self.params.items():
            grad = p.grad
            if grad is None:
                continue
            m = self._m[name] = self.beta1 * self._m[name] + (1.0 - self.beta1) * grad
            v = self._v[name] = self.beta2 * self._v[name] + (1.0 - self.beta2) * grad**2
            p.data = p.data - self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)


@dataclass
class TrainState:
    decisions: int = 0
    gradient_steps: int = 0


def train_step(
    model: QNetwork,
    target_model: QNetwork,
    buffer: ReplayBuffer,
    optimizer: Adam,
    config: TrainConfig,
    rng: np.random.Generator,
    state: TrainState,
) -> float | None:
    """One sampled TD-regression step; returns the batch loss, or None if the
    buffer does not hold a full batch yet."""
    if len(buffer) < config.batch_size:
        return None
    batch = buffer.sample(rng, config.batch_size)
    targets = td_targets(batch, target_model, config.gamma)

    obs = np.stack([t.obs for t in batch])
    actions = np.array([t.action for t in batch])
    model.zero_grads()
    if model.kind == "ego_attention":
        out, _ = model.forward_batch(obs, obs[:, :, 0] > 0)
    else:
        out, _ = model.forward_batch(obs)
    loss = ad.smooth_l1_mean(ad.gather_actions(out, actions), targets)
    loss.backward()
    optimizer.step()

    state.gradient_steps += 1
    if state.gradient_steps % config.target_sync == 0:
        target_model.copy_from(model)
    return float(loss.data)


METRIC_FIELDS = ("episode", "return", "length", "avg_speed", "epsilon", "mean_loss")


def run_training(
    env_config: EnvConfig,
    model_kind: str,
    config: TrainConfig,
    attention: AttentionConfig = AttentionConfig(),
) -> tuple[QNetwork, list[dict]]:
    """Train one agent; returns the model and one metrics row per episode.

    Fully deterministic given (env_config, model_kind, config): all randomness
    flows from config.seed through named child streams.
    """
    config.validate()
    env = IntersectionEnv(env_config)
    seeds = np.random.SeedSequence(config.seed)
    ss_init, ss_env, ss_actions, ss_replay = seeds.spawn(4)
    init_seed = int(ss_init.generate_state(1)[0])
    rng_env = np.random.default_rng(ss_env)
    rng_actions = np.random.default_rng(ss_actions)
    rng_replay = np.random.default_rng(ss_replay)

    model = build_model(model_kind, seed=init_seed, attention=attention)
    target_model = build_model(model_kind, seed=init_seed, attention=attention)
    target_model.copy_from(model)
    optimizer = Adam(model.params, config.learning_rate)
    buffer = ReplayBuffer(config.replay_capacity)
    schedule = EpsilonSchedule(config.epsilon_start, config.epsilon_end, config.epsilon_decay_steps)
    state = TrainState()

    metrics: list[dict] = []
    for episode in range(config.episodes):
        scene = env.reset(int(rng_env.integers(0, 2**31 - 1)))
        obs = encode_observation(model_kind, scene)
        ep_return = 0.0
        speeds: list[float] = []
        losses: list[float] = []
        eps_start = schedule.value(state.decisions)

        while True:
            eps = schedule.value(state.decisions)
            action = select_action(model, obs, eps, rng_actions)
            outcome = env.step(scene, EgoAction(action))
            next_obs = encode_observation(model_kind, outcome.next_scene)
            buffer.append(Transition(obs, action, outcome.reward, next_obs, outcome.terminal))
            state.decisions += 1

            loss = train_step(model, target_model, buffer, optimizer, config, rng_replay, state)
            if loss is not None:
                if not math.isfinite(loss):
                    raise TrainingDiverged(
                        f"non-finite loss at episode {episode}, gradient step {state.gradient_steps}"
                    )
                losses.append(loss)

            ep_return += outcome.reward
            speeds.append(outcome.next_scene.ego.v)
            scene = outcome.next_scene
            obs = next_obs
            if outcome.terminal:
                break

        metrics.append(
            {
                "episode": episode,
                "return": ep_return,
                "length": len(speeds),
                "avg_speed": float(np.mean(speeds)),
                "epsilon": eps_start,
                "mean_loss": float(np.mean(losses)) if losses else 0.0,
            }
        )
    return model, metrics


@dataclass(frozen=True)
class EvalSummary:
    episodes: int
    return_mean: float
    return_ci: float  # 95% normal-approximation half width
    length_mean: float
    length_ci: float
    speed_mean: float
    speed_ci: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _mean_ci(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, 0.0
    return mean, float(1.96 * np.std(values, ddof=1) / math.sqrt(values.size))


def evaluate(
    model: QNetwork, env_config: EnvConfig, episodes: int, seed: int
) -> EvalSummary:
    """Greedy-policy statistics over seeded episodes."""
    if episodes < 1:
        raise ValueError("evaluate needs at least one episode")
    env = IntersectionEnv(env_config)
    rng_env = np.random.default_rng(np.random.SeedSequence(seed))
    returns, lengths, speeds = [], [], []
    for _ in range(episodes):
        scene = env.reset(int(rng_env.integers(0, 2**31 - 1)))
        ep_return = 0.0
        ep_speeds = []
        while True:
            obs = encode_observation(model.kind, scene)
            values = _batch_values(model, obs[None, ...])[0]
            outcome = env.step(scene, EgoAction(int(np.argmax(values))))
            ep_return += outcome.reward
            ep_speeds.append(outcome.next_scene.ego.v)
            scene = outcome.next_scene
            if outcome.terminal:
                break
        returns.append(ep_return)
        lengths.append(len(ep_speeds))
        speeds.append(float(np.mean(ep_speeds)))

    r_mean, r_ci = _mean_ci(np.array(returns))
    l_mean, l_ci = _mean_ci(np.array(lengths, dtype=np.float64))
    s_mean, s_ci = _mean_ci(np.array(speeds))
    return EvalSummary(episodes, r_mean, r_ci, l_mean, l_ci, s_mean, s_ci)
