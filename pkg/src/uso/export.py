"""Grid export: 6-decimal CSV and plain (P2) PGM, top row = largest y."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


def grid_csv(values: np.ndarray) -> str:
    rows = values[::-1]
    return "".join(",".join(f"{v:.6f}" for v in row) + "\n" for row in rows)


def pgm_level(v: float) -> int:
    return min(255, max(0, int(math.floor(v * 255 + 0.5))))


def grid_pgm(values: np.ndarray) -> str:
    ny, nx = values.shape
    body = "\n".join(" ".join(str(pgm_level(v)) for v in row) for row in values[::-1])
    return f"P2\n{nx} {ny}\n255\n{body}\n"


def write_grid(values: np.ndarray, stem: str | Path) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.pgm``."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path, pgm_path = stem.with_suffix(".csv"), stem.with_suffix(".pgm")
    csv_path.write_text(grid_csv(values))
    pgm_path.write_text(grid_pgm(values))
    return csv_path, pgm_path
