"""Deterministic result persistence: CSV, JSON, plot data, run manifest.

Every writer here produces byte-identical output for identical inputs:
floats are rendered with ``repr`` (shortest round-trip form), JSON keys
are sorted, and the manifest timestamp honors the ``SOURCE_DATE_EPOCH``
reproducible-build convention when that variable is set.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Mapping, Sequence

import numpy as np

from .evolution import TimeSeries

__all__ = [
    "RunManifest",
    "fmt",
    "run_timestamp",
    "sanitize_json",
    "write_json",
    "write_plot_curve",
    "write_plot_index",
    "write_timeseries_csv",
    "write_rows_csv",
]


def fmt(value: float) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(value))


def run_timestamp() -> str:
    """ISO-8601 UTC timestamp; frozen by SOURCE_DATE_EPOCH when set."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(tz=timezone.utc)
    return moment.replace(microsecond=0).isoformat()


def sanitize_json(obj):
    """Recursively make an object strict-JSON safe (no NaN/Inf literals)."""
    if isinstance(obj, Mapping):
        return {str(k): sanitize_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize_json(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        if math.isnan(val):
            return "nan"
        if math.isinf(val):
            return "inf" if val > 0 else "-inf"
        return val
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [sanitize_json(v) for v in obj.tolist()]
    return obj


def write_json(path: str, payload) -> None:
    text = json.dumps(
        sanitize_json(payload), sort_keys=True, indent=2, allow_nan=False
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def write_timeseries_csv(path: str, series: TimeSeries) -> None:
    """Fixed column order: t, dt, mass, h1, lp1, sup, then one Q per weight."""
    labels = [w.label for w in series.weights]
    header = ["t", "dt", "mass", "h1", "lp1", "sup"] + [f"Q_{lab}" for lab in labels]
    columns = [series.times, series.dts, series.mass, series.h1,
               series.lp1, series.sup]
    columns += [series.momenta[lab] for lab in labels]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_rows_csv(path: str, header: Sequence[str], rows) -> None:
    """Small generic CSV writer; cells are floats, ints, bools, or strings."""
    def cell(v) -> str:
        if isinstance(v, (bool, np.bool_)):
            return "true" if v else "false"
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return fmt(v)
        return str(v)

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell(v) for v in row) + "\n")


def write_plot_curve(path: str, x, y) -> None:
    """Two-column plain-text curve data (rendering is left to external tools)."""
    xs = np.asarray(x, dtype=float).ravel()
    ys = np.asarray(y, dtype=float).ravel()
    if xs.shape != ys.shape:
        raise ValueError("curve columns must have equal length")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for xv, yv in zip(xs, ys):
            fh.write(f"{fmt(xv)} {fmt(yv)}\n")


def write_plot_index(path: str, curves: Sequence[dict]) -> None:
    """Descriptor file naming each emitted curve and its axis labels."""
    write_json(path, {"curves": list(curves)})


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a run and locate its outputs."""

    command: str
    config: Mapping
    version: str
    seed: int
    workers: int
    out_dir: str
    timestamp: str
    outputs: tuple

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": sanitize_json(self.config),
            "version": self.version,
            "seed": self.seed,
            "workers": self.workers,
            "out_dir": self.out_dir,
            "timestamp": self.timestamp,
            "outputs": sorted(self.outputs),
        }

    def write(self, path: str) -> None:
        write_json(path, self.to_dict())
