"""Deterministic JSON reports and CSV traces."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

REPORT_VERSION = 1

SLOT_HEADER = ["slot", "total", "energy", "tran", "ser", "switch", "active_count", "unserved"]


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def dumps(results):
    return json.dumps(_plain(results), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    return v


def write_csv(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([_cell(v) for v in row])
    return Path(path)


def slot_rows(slots, costs):
    """Per-slot cost breakdown rows for :data:`SLOT_HEADER`."""
    return [
        (int(t), c.total, c.energy, c.c_tran, c.c_ser, c.switching, c.active_count, c.unserved)
        for t, c in zip(slots, costs)
    ]


def emit_report(results, out_dir, traces=None):
    """Write ``report.json`` plus one ``trace_<name>.csv`` per ``(header, rows)`` trace.

    Output depends only on the arguments, so re-emitting identical results
    reproduces identical bytes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    body = {"report_version": REPORT_VERSION, "methods": [], **results}
    paths = []
    report = out / "report.json"
    report.write_text(dumps(body))
    paths.append(report)
    for name, (header, rows) in sorted((traces or {}).items()):
        paths.append(write_csv(out / f"trace_{name}.csv", header, rows))
    return paths


def read_trace_totals(path, column="total"):
    with Path(path).open() as fh:
        return [float(row[column]) for row in csv.DictReader(fh)]
