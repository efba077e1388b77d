"""Read and write sample paths as ``t,r`` CSV."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .model import SamplePath

UNIFORM_RTOL = 1e-9


def write_path_csv(path: SamplePath, destination) -> Path:
    dest = Path(destination)
    with dest.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "r"])
        for t, r in zip(path.times, path.values):
            w.writerow([repr(float(t)), repr(float(r))])
    return dest


def read_path_csv(source) -> SamplePath:
    """Parse a ``t,r`` CSV; times must be strictly increasing and uniform."""
    with Path(source).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "r"]:
            raise ValueError(f"expected header 't,r', got {header}")
        rows = [(float(t), float(r)) for t, r in reader]
    if len(rows) < 2:
        raise ValueError("a path file needs at least 2 rows")
    t = np.array([row[0] for row in rows])
    r = np.array([row[1] for row in rows])
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise ValueError("times must be strictly increasing")
    dt = (t[-1] - t[0]) / (t.size - 1)
    if np.max(np.abs(steps - dt)) > UNIFORM_RTOL * max(1.0, abs(t[-1])) + 1e-12 * dt:
        raise ValueError("times are not on a uniform grid")
    return SamplePath(float(dt), r, float(t[0]))
