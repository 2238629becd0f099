"""FIFO experience replay."""

from __future__ import annotations

from collections import deque
from typing import NamedTuple

import numpy as np


class Transition(NamedTuple):
    obs: np.ndarray
    action: int  # 0..2
    reward: float  # in {-5, 0, 1}
    next_obs: np.ndarray
    terminal: bool


class ReplayBuffer:
    """Ring buffer evicting the oldest transition first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("replay capacity must be positive")
        self.capacity = capacity
        self._ring: deque[Transition] = deque(maxlen=capacity)
        self.inserted = 0

    def append(self, transition: Transition) -> None:
        self._ring.append(transition)
        self.inserted += 1

    def sample(self, rng: np.random.Generator, count: int) -> list[Transition]:
        if count > len(self._ring):
            raise ValueError(f"cannot sample {count} from buffer of {len(self._ring)}")
        indices = rng.choice(len(self._ring), size=count, replace=False)
        return [self._ring[i] for i in indices]

    def __len__(self) -> int:
        return len(self._ring)

    def __iter__(self):
        return iter(self._ring)
