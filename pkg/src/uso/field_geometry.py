"""Court model, end-zone geometry and image-to-court registration.

Canonical court frame: origin at the defending-side left corner, x along the
long axis, y along the short axis, offense always attacking +x. The attacking
end zone is ``x in [length - endzone_depth, length]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from uso.errors import (
    DegenerateConfiguration,
    InsideEndzone,
    OutOfBounds,
    PointAtInfinity,
    SchemaError,
    TooFewPoints,
)

OUT_OF_BOUNDS_TOLERANCE = 2.0


class Point2D(NamedTuple):
    x: float
    y: float


class Direction(str, Enum):
    PLUS_X = "plusx"
    MINUS_X = "minusx"


@dataclass(frozen=True)
class FieldSpec:
    length: float
    width: float
    endzone_depth: float

    def __post_init__(self) -> None:
        if not (self.endzone_depth > 0 and self.length > 2 * self.endzone_depth):
            raise ValueError(
                f"need length > 2*endzone_depth > 0, got {self.length}/{self.endzone_depth}"
            )
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")

    @property
    def front_line_x(self) -> float:
        return self.length - self.endzone_depth

    @property
    def diagonal(self) -> float:
        return math.hypot(self.length, self.width)

    def contains(self, p: Sequence[float], tol: float = 0.0) -> bool:
        return -tol <= p[0] <= self.length + tol and -tol <= p[1] <= self.width + tol


THREES = FieldSpec(54.0, 20.0, 10.0)
OFFICIAL = FieldSpec(100.0, 37.0, 18.0)
PRESETS = {"threes": THREES, "official": OFFICIAL}


def parse_field(text: str) -> FieldSpec:
    """Resolve ``threes``, ``official`` or ``custom:L,W,E`` to a FieldSpec."""
    text = text.strip()
    if text in PRESETS:
        return PRESETS[text]
    if text.startswith("custom:"):
        parts = text[len("custom:"):].split(",")
        if len(parts) != 3:
            raise ValueError(f"custom field needs L,W,E, got {text!r}")
        return FieldSpec(*(float(v) for v in parts))
    raise ValueError(f"unknown field preset {text!r}")


@dataclass(frozen=True)
class BBox:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"invalid bbox {self}")


def bbox_center(b: BBox) -> Point2D:
    return Point2D((b.x1 + b.x2) / 2, (b.y1 + b.y2) / 2)


# ---------------------------------------------------------------------------
# Homography
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Homography:
    """3x3 projective map, normalised so that ``m[2, 2] == 1``."""

    m: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.m, dtype=float).reshape(3, 3)
        if abs(m[2, 2]) < 1e-12:
            raise DegenerateConfiguration("homography has m[2][2] == 0; cannot normalise")
        m = m / m[2, 2]
        if abs(np.linalg.det(m)) <= 1e-12:
            raise DegenerateConfiguration("homography is singular")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))


def project(h: Homography, p: Sequence[float]) -> Point2D:
    m = h.m
    x, y = float(p[0]), float(p[1])
    u = m[0, 0] * x + m[0, 1] * y + m[0, 2]
    v = m[1, 0] * x + m[1, 1] * y + m[1, 2]
    w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    if abs(w) < 1e-12:
        raise PointAtInfinity(f"point ({x}, {y}) maps to infinity")
    return Point2D(float(u / w), float(v / w))


def _hartley(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Similarity moving the centroid to the origin with mean distance sqrt(2)."""
    centroid = points.mean(axis=0)
    mean_dist = np.mean(np.linalg.norm(points - centroid, axis=1))
    if mean_dist < 1e-12:
        raise DegenerateConfiguration("all points coincide")
    s = math.sqrt(2.0) / mean_dist
    t = np.array([[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]])
    homog = np.column_stack([points, np.ones(len(points))])
    return (t @ homog.T).T[:, :2], t


def _check_general_position(pts: np.ndarray, label: str) -> None:
    # pts are Hartley-normalised, so an absolute tolerance is meaningful
    for i, j in combinations(range(len(pts)), 2):
        if np.linalg.norm(pts[i] - pts[j]) < 1e-9:
            raise DegenerateConfiguration(f"duplicate {label} points {i} and {j}")
    if len(pts) == 4:
        for i, j, k in combinations(range(4), 3):
            a, b = pts[j] - pts[i], pts[k] - pts[i]
            if abs(a[0] * b[1] - a[1] * b[0]) < 1e-9:
                raise DegenerateConfiguration(f"{label} points {i}, {j}, {k} are collinear")


def estimate_homography(
    correspondences: Iterable[tuple[Sequence[float], Sequence[float]]],
) -> Homography:
    """Fit a pixel -> court homography with the normalised DLT.

    Exact for four points in general position; linear least squares (smallest
    right singular vector) for more.
    """
    pairs = [(tuple(map(float, src)), tuple(map(float, dst))) for src, dst in correspondences]
    if len(pairs) < 4:
        raise TooFewPoints(f"need at least 4 correspondences, got {len(pairs)}")
    src = np.array([s for s, _ in pairs])
    dst = np.array([d for _, d in pairs])
    if not (np.all(np.isfinite(src)) and np.all(np.isfinite(dst))):
        raise DegenerateConfiguration("non-finite correspondence")

    src_n, t_src = _hartley(src)
    dst_n, t_dst = _hartley(dst)
    _check_general_position(src_n, "source")
    _check_general_position(dst_n, "destination")

    rows = []
    for (x, y), (u, v) in zip(src_n, dst_n):
        rows.append([-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u])
        rows.append([0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v])
    a = np.array(rows)
    _, sv, vt = np.linalg.svd(a)
    # rank < 8 means the points do not pin down a unique projective map
    if sv[7] < 1e-10 * sv[0]:
        raise DegenerateConfiguration("correspondences do not determine a homography")
    h_n = vt[-1].reshape(3, 3)
    m = np.linalg.inv(t_dst) @ h_n @ t_src
    return Homography(m)


def read_homography(path: str | Path) -> Homography:
    values = Path(path).read_text().split()
    if len(values) != 9:
        raise SchemaError(f"{path}: expected 9 numbers, found {len(values)}")
    try:
        return Homography(np.array([float(v) for v in values]).reshape(3, 3))
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def write_homography(h: Homography, path: str | Path) -> None:
    lines = [" ".join(repr(float(v)) for v in row) for row in h.m]
    Path(path).write_text("\n".join(lines) + "\n")


def read_correspondences(path: str | Path) -> list[tuple[Point2D, Point2D]]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise SchemaError(f"{path}:{lineno}: expected 'px py cx cy'", line=lineno)
        try:
            px, py, cx, cy = (float(v) for v in parts)
        except ValueError as exc:
            raise SchemaError(f"{path}:{lineno}: {exc}", line=lineno) from exc
        out.append((Point2D(px, py), Point2D(cx, cy)))
    return out


# ---------------------------------------------------------------------------
# Court geometry
# ---------------------------------------------------------------------------


def standardize_direction(frame, attacking: Direction, field: FieldSpec):
    """Reflect a frame so that the offense attacks +x.

    Works on any frame-like dataclass with ``players`` (each with ``position``
    and ``velocity``) and ``disc``.
    """
    entities = [*frame.players, frame.disc]
    for e in entities:
        if not field.contains(e.position, OUT_OF_BOUNDS_TOLERANCE):
            raise OutOfBounds(
                f"frame {frame.index}: position {tuple(e.position)} outside court "
                f"beyond {OUT_OF_BOUNDS_TOLERANCE} m"
            )
    if Direction(attacking) is Direction.PLUS_X:
        return frame

    def flip(e):
        return replace(
            e,
            position=Point2D(field.length - e.position.x, e.position.y),
            velocity=(-e.velocity[0], e.velocity[1]),
        )

    return replace(frame, players=tuple(flip(p) for p in frame.players), disc=flip(frame.disc))


def in_attacking_endzone(field: FieldSpec, p: Sequence[float]) -> bool:
    x, y = p[0], p[1]
    return field.front_line_x <= x <= field.length and 0.0 <= y <= field.width


def endzone_angle(field: FieldSpec, p: Sequence[float]) -> float:
    """Angle (radians) subtended at ``p`` by the attacking end zone's front line."""
    if in_attacking_endzone(field, p):
        raise InsideEndzone(f"{tuple(p)} lies inside the attacking end zone")
    fx = field.front_line_x
    ux, uy = fx - p[0], 0.0 - p[1]
    vx, vy = fx - p[0], field.width - p[1]
    return math.atan2(abs(ux * vy - uy * vx), ux * vx + uy * vy)
