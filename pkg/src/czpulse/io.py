"""CSV/manifest output helpers (deterministic formatting)."""

from __future__ import annotations

import csv
import datetime
import json
import math
import os


def fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.10g}"
    return str(x)


def write_csv(path, columns, rows) -> str:
    """One header row, stable %.10g float formatting, one row per dict."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row.get(c, "")) for c in columns])
    return str(path)


def write_manifest(outdir, *, config_path, experiment, seed, files, version) -> str:
    """Reproducibility record next to every output set (timestamp included)."""
    payload = {
        "config": str(config_path),
        "experiment": experiment,
        "output_dir": str(outdir),
        "seed": seed,
        "tool_version": version,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "files": [os.path.basename(f) for f in files],
    }
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
