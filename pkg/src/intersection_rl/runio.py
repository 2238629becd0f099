"""Run artifacts: atomic writes, metrics CSVs, and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os

from . import __version__
from .dqn.trainer import METRIC_FIELDS


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file and rename so readers never see partial output."""
    tmp = f"{path}.tmp"
    with open(tmp, "w") as handle:
        handle.write(text)
    os.replace(tmp, path)


def write_json_atomic(path: str, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def write_metrics_csv(path: str, rows: list[dict]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(METRIC_FIELDS)
    for row in rows:
        writer.writerow([_format(row[field]) for field in METRIC_FIELDS])
    atomic_write_text(path, buffer.getvalue())


def read_metrics_csv(path: str) -> list[dict]:
    rows = []
    with open(path) as handle:
        for record in csv.DictReader(handle):
            rows.append(
                {
                    "episode": int(record["episode"]),
                    "return": float(record["return"]),
                    "length": int(record["length"]),
                    "avg_speed": float(record["avg_speed"]),
                    "epsilon": float(record["epsilon"]),
                    "mean_loss": float(record["mean_loss"]),
                }
            )
    return rows


def code_version() -> str:
    """Content hash of the released version string, recorded for audit."""
    return hashlib.sha1(f"intersection-rl-{__version__}".encode()).hexdigest()


def build_manifest(config, seed: int) -> dict:
    return {
        "config": dict(sorted(config.values.items(), key=lambda kv: kv[0])),
        "config_lines": config.canonical_lines(),
        "config_hash": config.config_hash(),
        "seed": seed,
        "agent": config.agent_kind,
        "version": __version__,
        "code_version": code_version(),
    }


def run_dir(out_dir: str, agent: str, seed: int) -> str:
    return os.path.join(out_dir, agent, str(seed))


CHECKPOINT_NAME = "checkpoint.json"
METRICS_NAME = "metrics.csv"
MANIFEST_NAME = "manifest.json"
