"""Conflict prediction and right-of-way resolution for scripted traffic."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .vehicle import VehicleState, predict_positions

if TYPE_CHECKING:  # pragma: no cover
    from .env import Scene


@dataclass(frozen=True)
class PredictionParams:
    horizon: float = 3.0  # s
    dt: float = 0.25  # s


def _yielder(a: VehicleState, b: VehicleState) -> VehicleState:
    """Which of two conflicting vehicles must brake."""
    if a.priority_rank != b.priority_rank:
        return a if a.priority_rank < b.priority_rank else b
    da = math.hypot(a.x, a.y)
    db = math.hypot(b.x, b.y)
    if da != db:
        return a if da > db else b
    return a if a.vid < b.vid else b


def resolve_yielding(
    scene: "Scene",
    params: PredictionParams = PredictionParams(),
    intent_speeds: dict[int, float] | None = None,
) -> set[int]:
    """Vids of scripted vehicles that must brake until their conflicts clear.

    Every vehicle (the ego included) projects constant-velocity positions over
    the prediction horizon; for each pair whose predictions come closer than
    half the summed lengths at the same future instant, the lower-priority
    member yields. The ego never brakes through this mechanism: its speed is
    chosen by the policy, so a conflict it loses is left for the policy to
    handle.

    intent_speeds optionally floors a vehicle's prediction speed at the speed
    it intends to resume; without it a vehicle stopped by its own yielding
    would predict no conflict, creep forward, and re-brake ever deeper into
    the crossing path.
    """
    vehicles = [scene.ego, *scene.others]
    n = len(vehicles)
    if n < 2:
        return set()

    floors = intent_speeds or {}
    tracks = np.stack(
        [
            predict_positions(
                replace(v, v=max(v.v, floors.get(v.vid, 0.0))), params.horizon, params.dt
            )
            for v in vehicles
        ]
    )
    diff = tracks[:, None, :, :] - tracks[None, :, :, :]
    dist2 = np.einsum("ijkc,ijkc->ijk", diff, diff)

    lengths = np.array([v.length for v in vehicles])
    threshold = (lengths[:, None] + lengths[None, :]) / 2.0
    conflict = (dist2 < threshold[:, :, None] ** 2).any(axis=2)

    braking: set[int] = set()
    for i in range(n):
        for j in range(i + 1, n):
            if not conflict[i, j]:
                continue
            loser = _yielder(vehicles[i], vehicles[j])
            if loser is not scene.ego:
                braking.add(loser.vid)
    return braking
