"""Plain-text point-pattern files.

A header line names the coordinates (``x,y`` in the plane), then one point
per line. Lines starting with ``#`` carry metadata such as the seed.
"""
from __future__ import annotations

import hashlib
import io
from pathlib import Path

import numpy as np

from .primitives import Configuration

AXES = "xyzuvw"


def format_points(points, meta: dict | None = None) -> str:
    pts = np.asarray(points, dtype=np.float64)
    d = pts.shape[1] if pts.ndim == 2 and pts.shape[1] else 2
    header = ",".join(AXES[i] if i < len(AXES) else f"x{i}" for i in range(d))
    body = "".join(",".join(f"{v:.17g}" for v in row) + "\n" for row in pts.tolist())
    lines = []
    if meta:
        meta = dict(meta)
        meta.setdefault("sha256", hashlib.sha256(body.encode()).hexdigest())
        lines = [f"# {k}: {v}\n" for k, v in meta.items()]
    return "".join(lines) + header + "\n" + body


def write_points(path, config, meta: dict | None = None) -> None:
    pts = config.points if isinstance(config, Configuration) else config
    Path(path).write_text(format_points(pts, meta))


def parse_points(text: str):
    meta = {}
    rows = []
    d = None
    for line in io.StringIO(text):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
            continue
        if d is None:
            d = len(line.split(","))
            continue
        vals = [float(v) for v in line.split(",")]
        if len(vals) != d:
            raise ValueError(f"expected {d} coordinates, got {line!r}")
        rows.append(vals)
    if d is None:
        raise ValueError("missing header line")
    return Configuration(np.array(rows).reshape(-1, d), d=d), meta


def read_points(path) -> Configuration:
    return parse_points(Path(path).read_text())[0]
