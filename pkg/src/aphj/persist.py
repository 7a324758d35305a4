"""Snapshot, series, manifest and report files.

Everything is written with ``repr`` floats and sorted JSON keys, so reruns of
the same config produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Iterable

import numpy as np

from .apfunc import SampledLine
from .asymptotics import DiagnosticsSeries
from .conslaw import CellField1D
from .torus import TorusField

SNAPSHOT_HEADER = ["rank", "gridN", "time"]


def _plain(obj):
    """Recursively convert numpy scalars/arrays into JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(_plain(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def snapshot_kind(snap) -> str:
    if isinstance(snap, TorusField):
        return "hj-torus"
    if isinstance(snap, CellField1D):
        return "cl1d"
    if isinstance(snap, SampledLine):
        return "hj-line"
    raise TypeError(f"cannot persist {type(snap).__name__}")


def write_snapshot(snap, path) -> dict:
    """CSV with header ``rank,gridN,time``, one metadata row, then one value per row (C order)."""
    vals = np.asarray(snap.values, dtype=float)
    rank = vals.ndim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SNAPSHOT_HEADER)
        w.writerow([rank, vals.shape[0], repr(float(snap.time))])
        for v in vals.ravel():
            fh.write(repr(float(v)) + "\n")
    entry = {"file": os.path.basename(path), "kind": snapshot_kind(snap), "time": float(snap.time),
             "rank": rank, "gridN": int(vals.shape[0])}
    if hasattr(snap, "length"):
        entry["length"] = float(snap.length)
    return entry


def read_snapshot(path) -> TorusField:
    """Load a snapshot written by :func:`write_snapshot` as a TorusField."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != SNAPSHOT_HEADER:
            raise ValueError(f"{path}: expected header {','.join(SNAPSHOT_HEADER)}")
        rank, n, t = fh.readline().strip().split(",")
        vals = np.array([float(line) for line in fh if line.strip()])
    rank, n = int(rank), int(n)
    if vals.size != n**rank:
        raise ValueError(f"{path}: expected {n**rank} values, found {vals.size}")
    return TorusField(vals.reshape((n,) * rank), float(t))


def write_series(series: DiagnosticsSeries, path) -> None:
    names, cols = series.columns()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for i in range(len(series)):
            w.writerow([repr(float(c[i])) for c in cols])


def write_run(out_dir, resolved_config: dict, result, snapshots_mode: str) -> Path:
    """Write manifest, snapshots, series and report for one scenario run."""
    out = Path(out_dir)
    snap_dir = out / "snapshots"
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    chosen: Iterable = []
    if snapshots_mode == "all":
        chosen = result.snapshots
    elif snapshots_mode == "final":
        # keep the last snapshot of each labelled trajectory
        last = {}
        for label, snap in result.snapshots:
            last[label] = snap
        chosen = list(last.items())
    if chosen:
        snap_dir.mkdir(exist_ok=True)
        for i, (label, snap) in enumerate(chosen):
            name = f"{i:04d}_{label}.csv"
            e = write_snapshot(snap, snap_dir / name)
            e["file"] = f"snapshots/{name}"
            e["label"] = label
            entries.append(e)
    files = {"report": "report.json"}
    if result.series is not None:
        write_series(result.series, out / "series.csv")
        files["series"] = "series.csv"
    report = {
        "scenario": result.scenario,
        "params": result.params,
        "series": result.series.to_json() if result.series is not None else [],
        "verdict": result.verdict,
        "thresholds": result.thresholds,
    }
    dump_json(report, out / "report.json")
    manifest = {"config": resolved_config, "snapshots": entries, "files": files}
    dump_json(manifest, out / "manifest.json")
    return out
