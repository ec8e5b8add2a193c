"""CSV series output and run manifests.

One CSV per (selector, aggregate-or-realization); columns are
``k, metric, u_0..u_{N-1}, nash_flag, max_avg_regret``.  Floats are
written with shortest-roundtrip repr, so identical runs produce
byte-identical files.  Every run directory gets a ``manifest.yaml``
embedding the fully resolved configuration.
"""

from __future__ import annotations

import csv
from pathlib import Path

import yaml

from .engine import MetricsRecord
from .scenario import SCHEMA_VERSION, ScenarioConfig, config_to_dict


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def series_header(n_radars: int) -> list[str]:
    return (
        ["k", "metric"]
        + [f"u_{i}" for i in range(n_radars)]
        + ["nash_flag", "max_avg_regret"]
    )


def write_aggregate_csv(path: Path, aggregate: list[dict], n_radars: int) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(series_header(n_radars))
        for row in aggregate:
            w.writerow(
                [_fmt(row["k"]), _fmt(row["metric"])]
                + [_fmt(u) for u in row["utilities"]]
                + [_fmt(row["nash_flag"]), _fmt(row["max_avg_regret"])]
            )


def write_realization_csv(
    path: Path, records: list[MetricsRecord], n_radars: int
) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(series_header(n_radars))
        for rec in records:
            w.writerow(
                [_fmt(rec.k), _fmt(rec.metric)]
                + [_fmt(u) for u in rec.utilities]
                + [_fmt(rec.nash_flag), _fmt(rec.max_avg_regret)]
            )


def write_manifest(
    out_dir: Path,
    config: ScenarioConfig,
    command: str,
    overrides: dict,
    outputs: list[str],
) -> Path:
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "overrides": overrides,
        "outputs": sorted(outputs),
        "config": config_to_dict(config),
    }
    path = out_dir / "manifest.yaml"
    with open(path, "w") as f:
        yaml.safe_dump(manifest, f, sort_keys=True)
    return path
