"""Learning-curve aggregation across seeds and agents: CSV tables and SVG charts."""

from __future__ import annotations

import csv
import io
import math
import os

import numpy as np

from .errors import UsageError
from .runio import MANIFEST_NAME, METRICS_NAME, atomic_write_text, read_metrics_csv

SMOOTH_WINDOW = 50  # episodes
FINAL_WINDOW = 100  # episodes scored for end-of-training comparisons

AGENT_COLORS = {
    "fcn_list": "#d62728",
    "cnn_grid": "#1f77b4",
    "ego_attention": "#2e8b2e",
}

CURVE_METRICS = ("return", "length", "avg_speed")


def smooth(values: np.ndarray, window: int = SMOOTH_WINDOW) -> np.ndarray:
    """Trailing moving average; early episodes average over what exists so far."""
    out = np.empty(len(values), dtype=np.float64)
    cumsum = np.cumsum(values, dtype=np.float64)
    for t in range(len(values)):
        lo = max(0, t - window + 1)
        total = cumsum[t] - (cumsum[lo - 1] if lo > 0 else 0.0)
        out[t] = total / (t - lo + 1)
    return out


def load_runs(run_dirs: list[str]) -> dict[str, list[tuple[int, list[dict]]]]:
    """Group run directories by agent kind; each entry is (seed, metric rows)."""
    import json

    grouped: dict[str, list[tuple[int, list[dict]]]] = {}
    for run in run_dirs:
        manifest_path = os.path.join(run, MANIFEST_NAME)
        metrics_path = os.path.join(run, METRICS_NAME)
        if not os.path.exists(manifest_path) or not os.path.exists(metrics_path):
            raise UsageError(f"{run} is not a completed run directory")
        with open(manifest_path) as handle:
            manifest = json.load(handle)
        grouped.setdefault(manifest["agent"], []).append(
            (manifest["seed"], read_metrics_csv(metrics_path))
        )
    for entries in grouped.values():
        entries.sort(key=lambda pair: pair[0])
    return grouped


def aggregate_curves(
    runs: list[tuple[int, list[dict]]], metric: str, window: int = SMOOTH_WINDOW
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Across-seed mean and 95% CI half-width of smoothed per-seed curves."""
    lengths = [len(rows) for _, rows in runs]
    common = min(lengths)
    warnings = []
    if len(set(lengths)) > 1:
        warnings.append(
            f"episode counts differ {sorted(set(lengths))}; truncating to {common}"
        )
    curves = np.stack(
        [smooth(np.array([r[metric] for r in rows[:common]]), window) for _, rows in runs]
    )
    mean = curves.mean(axis=0)
    if curves.shape[0] < 2:
        ci = np.zeros_like(mean)
    else:
        ci = 1.96 * curves.std(axis=0, ddof=1) / math.sqrt(curves.shape[0])
    return mean, ci, warnings


def final_window_stats(runs: list[tuple[int, list[dict]]], window: int = FINAL_WINDOW) -> dict:
    """Raw (unsmoothed) means over each seed's final episodes, pooled across seeds."""
    pooled = {"return": [], "length": [], "avg_speed": []}
    for _, rows in runs:
        tail = rows[-window:]
        for key in pooled:
            pooled[key].extend(r[key] for r in tail)
    return {key: float(np.mean(vals)) for key, vals in pooled.items()}


def _chart_svg(series: dict[str, tuple[np.ndarray, np.ndarray]], title: str, ylabel: str) -> str:
    width, height = 640, 400
    ml, mr, mt, mb = 60, 20, 30, 40
    plot_w, plot_h = width - ml - mr, height - mt - mb

    xs_max = max(len(mean) for mean, _ in series.values())
    lo = min(float((mean - ci).min()) for mean, ci in series.values())
    hi = max(float((mean + ci).max()) for mean, ci in series.values())
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def px(i: int) -> float:
        return ml + plot_w * (i / max(xs_max - 1, 1))

    def py(v: float) -> float:
        return mt + plot_h * (1.0 - (v - lo) / (hi - lo))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{title}</text>',
        f'<line x1="{ml}" y1="{mt + plot_h}" x2="{ml + plot_w}" y2="{mt + plot_h}" stroke="#333"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + plot_h}" stroke="#333"/>',
        f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="11">episode</text>',
        f'<text x="14" y="{mt + plot_h / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="11" transform="rotate(-90 14 {mt + plot_h / 2:.0f})">{ylabel}</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        value = lo + frac * (hi - lo)
        y = py(value)
        parts.append(f'<line x1="{ml - 4}" y1="{y:.1f}" x2="{ml}" y2="{y:.1f}" stroke="#333"/>')
        parts.append(
            f'<text x="{ml - 8}" y="{y + 4:.1f}" text-anchor="end" font-family="sans-serif" '
            f'font-size="10">{value:.2f}</text>'
        )
        x_episode = int(frac * (xs_max - 1))
        x = px(x_episode)
        parts.append(
            f'<line x1="{x:.1f}" y1="{mt + plot_h}" x2="{x:.1f}" y2="{mt + plot_h + 4}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{mt + plot_h + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{x_episode}</text>'
        )

    for li, (label, (mean, ci)) in enumerate(sorted(series.items())):
        color = AGENT_COLORS.get(label, "#555555")
        if ci.any():
            upper = [f"{px(i):.1f},{py(v):.1f}" for i, v in enumerate(mean + ci)]
            lower = [f"{px(i):.1f},{py(v):.1f}" for i, v in reversed(list(enumerate(mean - ci)))]
            parts.append(
                f'<polygon points="{" ".join(upper + lower)}" fill="{color}" fill-opacity="0.15" '
                'stroke="none"/>'
            )
        points = " ".join(f"{px(i):.1f},{py(v):.1f}" for i, v in enumerate(mean))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.6"/>')
        ly = mt + 14 + 16 * li
        parts.append(
            f'<line x1="{ml + plot_w - 130}" y1="{ly - 4}" x2="{ml + plot_w - 105}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{ml + plot_w - 100}" y="{ly}" font-family="sans-serif" font-size="11">'
            f"{label}</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts)


def compare_report(run_dirs: list[str], out_dir: str, window: int = SMOOTH_WINDOW) -> dict:
    """Aggregate completed runs into curves, charts, and a final-window summary.

    Output is a pure function of the input metrics files. Returns the summary:
    {agent: {return, length, avg_speed}} over each run's final episodes, plus
    any truncation warnings.
    """
    if len(run_dirs) < 2:
        raise UsageError("compare needs at least two completed runs")
    grouped = load_runs(run_dirs)
    os.makedirs(out_dir, exist_ok=True)

    all_warnings: list[str] = []
    ylabels = {"return": "episode return", "length": "episode length", "avg_speed": "mean speed (m/s)"}
    for metric in CURVE_METRICS:
        series = {}
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(["episode", "agent", "mean", "ci_half_width"])
        for agent, runs in sorted(grouped.items()):
            mean, ci, warnings = aggregate_curves(runs, metric, window)
            all_warnings.extend(f"{agent}/{metric}: {w}" for w in warnings)
            series[agent] = (mean, ci)
            for episode, (m, c) in enumerate(zip(mean, ci)):
                writer.writerow([episode, agent, f"{m:.9g}", f"{c:.9g}"])
        atomic_write_text(os.path.join(out_dir, f"compare_{metric}.csv"), buffer.getvalue())
        atomic_write_text(
            os.path.join(out_dir, f"compare_{metric}.svg"),
            _chart_svg(series, f"{metric} (smoothed, window {window})", ylabels[metric]),
        )

    summary = {agent: final_window_stats(runs) for agent, runs in sorted(grouped.items())}
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["agent", "final_return", "final_length", "final_avg_speed", "seeds"])
    for agent, stats in summary.items():
        writer.writerow(
            [
                agent,
                f"{stats['return']:.9g}",
                f"{stats['length']:.9g}",
                f"{stats['avg_speed']:.9g}",
                len(grouped[agent]),
            ]
        )
    atomic_write_text(os.path.join(out_dir, "summary.csv"), buffer.getvalue())
    return {"summary": summary, "warnings": all_warnings}
