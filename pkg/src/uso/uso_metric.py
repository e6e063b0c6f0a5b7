"""USO: offensive pitch control weighted by field position and pass length."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from uso.errors import NoHolderEver, OutOfCourt
from uso.field_geometry import FieldSpec, Point2D, endzone_angle, in_attacking_endzone
from uso.params import ModelParams
from uso.pitch_control import GridSpec, PitchControlField, compute_ppcf_grid
from uso.tracking_io import Frame, SetRecord, holder_sequence

DISTANCE_WEIGHTS = ("decreasing", "increasing")


def _require_in_court(field: FieldSpec, p: Sequence[float]) -> None:
    if not field.contains(p):
        raise OutOfCourt(f"{tuple(p)} is outside the {field.length}x{field.width} court")


def w_area(field: FieldSpec, p: Sequence[float]) -> float:
    """1 in the attacking end zone, else the front line's visual angle over pi."""
    _require_in_court(field, p)
    if in_attacking_endzone(field, p):
        return 1.0
    return endzone_angle(field, p) / math.pi


def w_distance(
    field: FieldSpec,
    p: Sequence[float],
    holder: Sequence[float],
    direction: str = "decreasing",
) -> float:
    """Pass-length weight normalised by the court diagonal.

    ``decreasing`` (default) penalises long throws: ``max(0, 1 - d / D)``.
    ``increasing`` is the opposite reading, ``min(1, d / D)``.
    """
    _require_in_court(field, p)
    _require_in_court(field, holder)
    ratio = math.hypot(p[0] - holder[0], p[1] - holder[1]) / field.diagonal
    if direction == "decreasing":
        return max(0.0, 1.0 - ratio)
    if direction == "increasing":
        return min(1.0, ratio)
    raise ValueError(f"distance weight must be one of {DISTANCE_WEIGHTS}, got {direction!r}")


def w_area_grid(field: FieldSpec, grid: GridSpec) -> np.ndarray:
    """w_area at every cell centre (0 outside the court)."""
    xs, ys = grid.centers()
    ux = field.front_line_x - xs
    cross = np.abs(ux * (field.width - ys) + ys * ux)
    dot = ux * ux - ys * (field.width - ys)
    with np.errstate(invalid="ignore"):
        angle = np.arctan2(cross, dot) / math.pi
    inside = (xs >= field.front_line_x) & (xs <= field.length) & (ys >= 0) & (ys <= field.width)
    return np.where(grid.in_court(field), np.where(inside, 1.0, angle), 0.0)


def w_distance_grid(field: FieldSpec, grid: GridSpec, holder: Sequence[float],
                    direction: str = "decreasing") -> np.ndarray:
    _require_in_court(field, holder)
    xs, ys = grid.centers()
    ratio = np.hypot(xs - holder[0], ys - holder[1]) / field.diagonal
    if direction == "decreasing":
        out = np.maximum(0.0, 1.0 - ratio)
    elif direction == "increasing":
        out = np.minimum(1.0, ratio)
    else:
        raise ValueError(f"distance weight must be one of {DISTANCE_WEIGHTS}, got {direction!r}")
    return np.where(grid.in_court(field), out, 0.0)


@dataclass(frozen=True, eq=False)
class UsoField:
    grid: GridSpec
    values: np.ndarray  # (ny, nx), row 0 = lowest y
    score: float
    argmax: Point2D
    ppcf: PitchControlField | None = None
    w_area: np.ndarray | None = None
    w_distance: np.ndarray | None = None

    def value_at(self, p: Sequence[float]) -> float:
        row, col = self.grid.cell_of(p)
        return float(self.values[row, col])


def uso_from_layers(grid: GridSpec, values: np.ndarray, in_court: np.ndarray) -> tuple[float, Point2D]:
    """Score and argmax; ties go to the lowest row-major cell index."""
    masked = np.where(in_court, values, -np.inf)
    flat = int(np.argmax(masked))  # first occurrence == lowest row-major index
    row, col = divmod(flat, grid.nx)
    return float(values[row, col]), grid.center(row, col)


def uso_field(
    frame: Frame,
    holder_id: int,
    grid: GridSpec,
    field: FieldSpec,
    params: ModelParams = ModelParams(),
    distance_weight: str = "decreasing",
    threads: int = 1,
) -> UsoField:
    ppcf = compute_ppcf_grid(frame, holder_id, grid, field, params, threads)
    holder = frame.player(holder_id).position
    wa = w_area_grid(field, grid)
    wd = w_distance_grid(field, grid, holder, distance_weight)
    values = np.where(ppcf.in_court, ppcf.offense * wa * wd, 0.0)
    score, argmax = uso_from_layers(grid, values, ppcf.in_court)
    return UsoField(grid, values, score, argmax, ppcf, wa, wd)


def carried_holders(frames: Sequence[Frame], params: ModelParams = ModelParams()) -> list[int]:
    """Holder per frame, with the last thrower standing in while the disc flies.

    Frames before the first catch use the first identified holder.
    """
    raw = holder_sequence(frames, params)
    first = next((h for h in raw if h is not None), None)
    if first is None:
        raise NoHolderEver("the disc is never held in this set")
    out, current = [], first
    for h in raw:
        if h is not None:
            current = h
        out.append(current)
    return out


def uso_score_series(
    record: SetRecord,
    grid: GridSpec,
    field: FieldSpec,
    params: ModelParams = ModelParams(),
    distance_weight: str = "decreasing",
    threads: int = 1,
) -> list[tuple[int, float, Point2D]]:
    """(frame index, USO score, argmax) for every frame of the set."""
    holders = carried_holders(record.frames, params)
    out = []
    for fr, h in zip(record.frames, holders):
        uf = uso_field(fr, h, grid, field, params, distance_weight, threads)
        out.append((fr.index, uf.score, uf.argmax))
    return out
