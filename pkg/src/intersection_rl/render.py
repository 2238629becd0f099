"""SVG rendering of intersection scenes with attention overlays."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .dqn.trainer import encode_observation
from .features import list_observation
from .nn.networks import QNetwork
from .sim.env import EgoAction, IntersectionEnv, Scene, TrajectoryRecorder

HEAD_COLORS = ("#2e8b2e", "#1f77b4", "#d62728", "#9467bd")  # head 1 green, head 2 blue
STROKE_WIDTH_MAX = 12.0  # px at attention weight 1.0
DRAW_THRESHOLD = 0.01  # weights below this are suppressed as clutter

EGO_FILL = "#f0b429"
OTHER_FILL = "#5b7da3"
ROAD_FILL = "#3c3c3c"


@dataclass(frozen=True)
class RenderFrame:
    scene: Scene
    weights: np.ndarray | None  # (heads, 1 + N), rows aligned with vids
    vids: list[int]  # vehicle ids per weight column, ego first
    index: int


def stroke_width(weight: float) -> float:
    """Line width encoding one attention weight; 0 when below the threshold."""
    return STROKE_WIDTH_MAX * weight if weight >= DRAW_THRESHOLD else 0.0


def drawn_strokes(frame: RenderFrame) -> dict[int, list[float]]:
    """vid -> per-head stroke widths that the frame will actually draw."""
    if frame.weights is None:
        return {}
    return {
        vid: [stroke_width(float(w)) for w in frame.weights[:, col]]
        for col, vid in enumerate(frame.vids)
    }


def render_frame_svg(frame: RenderFrame, scale: float = 5.0) -> str:
    scene = frame.scene
    extent = scene.roads.map_extent + 4.0
    size = 2.0 * extent * scale

    def sx(x: float) -> float:
        return (x + extent) * scale

    def sy(y: float) -> float:
        return (extent - y) * scale

    road_half = scene.roads.lane_width  # two lanes per road
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size:.0f}" '
        f'viewBox="0 0 {size:.0f} {size:.0f}">',
        f'<rect width="{size:.0f}" height="{size:.0f}" fill="#dcd6c7"/>',
        f'<rect x="{sx(-road_half):.1f}" y="0" width="{2 * road_half * scale:.1f}" '
        f'height="{size:.0f}" fill="{ROAD_FILL}"/>',
        f'<rect x="0" y="{sy(road_half):.1f}" width="{size:.0f}" '
        f'height="{2 * road_half * scale:.1f}" fill="{ROAD_FILL}"/>',
    ]
    for lane in (-road_half, 0.0, road_half):
        style = 'stroke="#f5f5f5" stroke-width="1"' if lane == 0 else 'stroke="#888" stroke-width="0.5"'
        parts.append(f'<line x1="{sx(lane):.1f}" y1="0" x2="{sx(lane):.1f}" y2="{size:.0f}" {style}/>')
        parts.append(f'<line x1="0" y1="{sy(lane):.1f}" x2="{size:.0f}" y2="{sy(lane):.1f}" {style}/>')

    strokes = drawn_strokes(frame)
    vehicles = {v.vid: v for v in (scene.ego, *scene.others)}
    for head in range(frame.weights.shape[0] if frame.weights is not None else 0):
        color = HEAD_COLORS[head % len(HEAD_COLORS)]
        for vid in frame.vids:
            width = strokes[vid][head]
            if width <= 0.0 or vid not in vehicles:
                continue
            target = vehicles[vid]
            if target is scene.ego:
                radius = scene.ego.length * scale * 0.8
                parts.append(
                    f'<circle cx="{sx(scene.ego.x):.1f}" cy="{sy(scene.ego.y):.1f}" r="{radius:.1f}" '
                    f'fill="none" stroke="{color}" stroke-width="{width:.2f}" stroke-opacity="0.65"/>'
                )
            else:
                parts.append(
                    f'<line x1="{sx(scene.ego.x):.1f}" y1="{sy(scene.ego.y):.1f}" '
                    f'x2="{sx(target.x):.1f}" y2="{sy(target.y):.1f}" '
                    f'stroke="{color}" stroke-width="{width:.2f}" stroke-opacity="0.65"/>'
                )

    for vehicle in (*scene.others, scene.ego):
        fill = EGO_FILL if vehicle is scene.ego else OTHER_FILL
        angle = -math.degrees(vehicle.psi)
        parts.append(
            f'<rect x="{-vehicle.length * scale / 2:.1f}" y="{-vehicle.width * scale / 2:.1f}" '
            f'width="{vehicle.length * scale:.1f}" height="{vehicle.width * scale:.1f}" '
            f'fill="{fill}" stroke="#111" stroke-width="0.8" '
            f'transform="translate({sx(vehicle.x):.1f},{sy(vehicle.y):.1f}) rotate({angle:.1f})"/>'
        )
    parts.append(
        f'<text x="6" y="{size - 8:.0f}" font-family="monospace" font-size="12" fill="#222">'
        f"t={scene.time:.1f}s frame={frame.index}</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts)


def rollout_frames(
    model: QNetwork,
    env: IntersectionEnv,
    seed: int,
    recorder: TrajectoryRecorder | None = None,
) -> list[RenderFrame]:
    """Greedy rollout capturing one frame per decision (attention when available)."""
    scene = env.reset(seed)
    if recorder is not None:
        recorder.snapshot(scene)
    frames = []
    index = 0
    while True:
        obs = encode_observation(model.kind, scene)
        if model.kind == "ego_attention":
            unpadded, vids = list_observation(scene, pad=False)
            values, trace = model.q_values(unpadded)
        else:
            vids = [scene.ego.vid, *(v.vid for v in scene.others)]
            values, trace = model.q_values(obs)
        frames.append(RenderFrame(scene.copy(), trace, vids, index))
        outcome = env.step(scene, EgoAction(int(np.argmax(values))), recorder)
        scene = outcome.next_scene
        index += 1
        if outcome.terminal:
            break
    return frames


def save_frames(frames: list[RenderFrame], out_dir: str, scale: float = 5.0) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for frame in frames:
        path = os.path.join(out_dir, f"frame_{frame.index:03d}.svg")
        with open(path, "w") as handle:
            handle.write(render_frame_svg(frame, scale))
        paths.append(path)
    return paths
