"""Tracking/event ingestion, velocity estimation and possession bookkeeping."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from uso.errors import (
    MissingEntity,
    NonChronological,
    NonContiguousFrames,
    NoPasses,
    SchemaError,
    TooFewFrames,
)
from uso.field_geometry import BBox, Homography, Point2D, bbox_center, project
from uso.params import ModelParams

DISC_ID = -1

COURT_HEADER = ["frame", "id", "team", "x", "y"]
COURT_HEADER_VEL = ["frame", "id", "team", "x", "y", "vx", "vy"]
PIXEL_HEADER = ["frame", "id", "team", "x1", "y1", "x2", "y2"]

TRACKING_FILE = "tracking.csv"
EVENTS_FILE = "events.csv"


class Team(str, Enum):
    OFFENSE = "O"
    DEFENSE = "D"


class Outcome(str, Enum):
    SCORE = "score"
    TURNOVER = "turnover"

    @property
    def label(self) -> str:
        return self.value.capitalize()


class PassRank(Enum):
    # value = position counted from the end of the possession
    LAST = 1
    SECOND_LAST = 2
    THIRD_LAST = 3

    @property
    def label(self) -> str:
        return {1: "Last", 2: "Second last", 3: "Third last"}[self.value]


@dataclass(frozen=True)
class PlayerState:
    id: int
    team: Team
    position: Point2D
    velocity: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class DiscState:
    position: Point2D
    velocity: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class Frame:
    index: int
    time: float
    players: tuple[PlayerState, ...]
    disc: DiscState

    def player(self, player_id: int) -> PlayerState | None:
        for p in self.players:
            if p.id == player_id:
                return p
        return None


@dataclass(frozen=True)
class PassEvent:
    release_frame: int
    reception_frame: int
    thrower_id: int
    receiver_id: int
    reception_point: Point2D

    def __post_init__(self) -> None:
        if not self.release_frame < self.reception_frame:
            raise ValueError(
                f"reception frame {self.reception_frame} not after release {self.release_frame}"
            )
        if self.thrower_id == self.receiver_id:
            raise ValueError(f"pass from player {self.thrower_id} to themself")


@dataclass(frozen=True)
class SetRecord:
    set_id: str
    fps: float
    frames: tuple[Frame, ...]
    passes: tuple[PassEvent, ...]
    outcome: Outcome

    def __post_init__(self) -> None:
        if not self.frames:
            raise ValueError(f"set {self.set_id}: no frames")
        n = len(self.frames)
        offense = {p.id for p in self.frames[0].players if p.team is Team.OFFENSE}
        for ev in self.passes:
            if not (0 <= ev.release_frame < n and 0 <= ev.reception_frame < n):
                raise ValueError(f"set {self.set_id}: pass {ev} outside frame range 0..{n - 1}")
            for pid in (ev.thrower_id, ev.receiver_id):
                if pid not in offense:
                    raise ValueError(f"set {self.set_id}: pass player {pid} is not on offense")


# ---------------------------------------------------------------------------
# CSV parsing
# ---------------------------------------------------------------------------


def _float(value: str, lineno: int, path) -> float:
    try:
        out = float(value)
    except ValueError:
        raise SchemaError(f"{path}:{lineno}: not a number: {value!r}", line=lineno) from None
    if not math.isfinite(out):
        raise SchemaError(f"{path}:{lineno}: non-finite value {value!r}", line=lineno)
    return out


def _int(value: str, lineno: int, path) -> int:
    try:
        return int(value)
    except ValueError:
        raise SchemaError(f"{path}:{lineno}: not an integer: {value!r}", line=lineno) from None


def parse_tracking_csv(
    path: str | Path,
    fps: float = 30.0,
    homography: Homography | None = None,
) -> list[Frame]:
    """Read a tracking CSV into frames sorted by index.

    Court-coordinate files carry ``x,y`` (optionally ``vx,vy``); pixel files
    carry bounding boxes and need ``homography`` to reach court coordinates.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header not in (COURT_HEADER, COURT_HEADER_VEL, PIXEL_HEADER):
            raise SchemaError(f"{path}:1: unrecognised header {','.join(header)!r}", line=1)
        pixel = header == PIXEL_HEADER
        if pixel and homography is None:
            raise SchemaError(f"{path}: bounding-box tracking needs a homography", line=1)
        has_vel = header == COURT_HEADER_VEL

        rows: dict[int, dict[int, tuple[str, Point2D, tuple[float, float]]]] = {}
        teams: dict[int, str] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SchemaError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}", line=lineno
                )
            frame_idx = _int(row[0], lineno, path)
            ent_id = _int(row[1], lineno, path)
            team = row[2].strip()
            if team not in ("O", "D", "disc"):
                raise SchemaError(f"{path}:{lineno}: unknown team {team!r}", line=lineno)
            if (team == "disc") != (ent_id == DISC_ID):
                raise SchemaError(f"{path}:{lineno}: disc rows must use id {DISC_ID}", line=lineno)
            nums = [_float(v, lineno, path) for v in row[3:]]
            if pixel:
                try:
                    box = BBox(*nums)
                except ValueError as exc:
                    raise SchemaError(f"{path}:{lineno}: {exc}", line=lineno) from None
                pos = project(homography, bbox_center(box))
                vel = (0.0, 0.0)
            else:
                pos = Point2D(nums[0], nums[1])
                vel = (nums[2], nums[3]) if has_vel else (0.0, 0.0)
            if teams.setdefault(ent_id, team) != team:
                raise SchemaError(f"{path}:{lineno}: entity {ent_id} changes team", line=lineno)
            frame_rows = rows.setdefault(frame_idx, {})
            if ent_id in frame_rows:
                what = "disc" if ent_id == DISC_ID else f"entity {ent_id}"
                raise SchemaError(f"{path}:{lineno}: duplicate {what} in frame {frame_idx}", line=lineno)
            frame_rows[ent_id] = (team, pos, vel)

    if not rows:
        raise SchemaError(f"{path}: no data rows")
    indices = sorted(rows)
    if indices != list(range(len(indices))):
        gap = next(i for i, idx in enumerate(indices) if idx != i)
        raise NonContiguousFrames(f"{path}: frame indices not contiguous from 0 (expected {gap}, found {indices[gap]})")

    all_ids = sorted(set(teams) | {DISC_ID})
    frames = []
    for idx in indices:
        frame_rows = rows[idx]
        for ent_id in all_ids:
            if ent_id not in frame_rows:
                raise MissingEntity(idx, ent_id)
        players = tuple(
            PlayerState(pid, Team(frame_rows[pid][0]), frame_rows[pid][1], frame_rows[pid][2])
            for pid in all_ids
            if pid != DISC_ID
        )
        _, disc_pos, disc_vel = frame_rows[DISC_ID]
        frames.append(Frame(idx, idx / fps, players, DiscState(disc_pos, disc_vel)))
    return frames


def write_tracking_csv(frames: Sequence[Frame], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COURT_HEADER_VEL)
        for fr in frames:
            for p in fr.players:
                w.writerow([fr.index, p.id, p.team.value, repr(p.position.x), repr(p.position.y),
                            repr(float(p.velocity[0])), repr(float(p.velocity[1]))])
            d = fr.disc
            w.writerow([fr.index, DISC_ID, "disc", repr(d.position.x), repr(d.position.y),
                        repr(float(d.velocity[0])), repr(float(d.velocity[1]))])


def parse_events_csv(path: str | Path) -> tuple[list[PassEvent], Outcome]:
    path = Path(path)
    passes: list[PassEvent] = []
    outcome: Outcome | None = None
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
                continue
            kind = row[0].strip()
            if kind == "pass":
                if len(row) != 7:
                    raise SchemaError(f"{path}:{lineno}: pass rows need 7 fields", line=lineno)
                rel, rec, thr, recv = (_int(v, lineno, path) for v in row[1:5])
                rx, ry = (_float(v, lineno, path) for v in row[5:7])
                try:
                    ev = PassEvent(rel, rec, thr, recv, Point2D(rx, ry))
                except ValueError as exc:
                    raise SchemaError(f"{path}:{lineno}: {exc}", line=lineno) from None
                if passes and ev.release_frame < passes[-1].reception_frame:
                    raise NonChronological(
                        f"{path}:{lineno}: pass released at {ev.release_frame} before previous "
                        f"reception at {passes[-1].reception_frame}"
                    )
                passes.append(ev)
            elif kind == "outcome":
                if len(row) != 2 or row[1].strip().lower() not in ("score", "turnover"):
                    raise SchemaError(f"{path}:{lineno}: outcome must be score|turnover", line=lineno)
                if outcome is not None:
                    raise SchemaError(f"{path}:{lineno}: duplicate outcome row", line=lineno)
                outcome = Outcome(row[1].strip().lower())
            else:
                raise SchemaError(f"{path}:{lineno}: unknown row kind {kind!r}", line=lineno)
    if outcome is None:
        raise SchemaError(f"{path}: missing outcome row")
    return passes, outcome


def write_events_csv(passes: Iterable[PassEvent], outcome: Outcome, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for ev in passes:
            w.writerow(["pass", ev.release_frame, ev.reception_frame, ev.thrower_id,
                        ev.receiver_id, repr(ev.reception_point.x), repr(ev.reception_point.y)])
        w.writerow(["outcome", Outcome(outcome).value])


def save_set(record: SetRecord, directory: str | Path) -> Path:
    """Write a set as ``<directory>/tracking.csv`` + ``events.csv``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_tracking_csv(record.frames, directory / TRACKING_FILE)
    write_events_csv(record.passes, record.outcome, directory / EVENTS_FILE)
    return directory


def load_set(directory: str | Path, fps: float = 30.0) -> SetRecord:
    directory = Path(directory)
    frames = parse_tracking_csv(directory / TRACKING_FILE, fps=fps)
    passes, outcome = parse_events_csv(directory / EVENTS_FILE)
    try:
        return SetRecord(directory.name, fps, tuple(frames), tuple(passes), outcome)
    except ValueError as exc:
        raise SchemaError(f"{directory}: {exc}") from None


# ---------------------------------------------------------------------------
# Kinematics and possession
# ---------------------------------------------------------------------------


def _smooth(series: np.ndarray, window: int) -> np.ndarray:
    if window == 1:
        return series
    half = window // 2
    n = len(series)
    out = np.empty_like(series)
    for t in range(n):
        lo, hi = max(0, t - half), min(n, t + half + 1)
        out[t] = series[lo:hi].mean(axis=0)
    return out


def _differentiate(pos: np.ndarray, fps: float) -> np.ndarray:
    vel = np.empty_like(pos)
    vel[1:-1] = (pos[2:] - pos[:-2]) * fps / 2
    vel[0] = (pos[1] - pos[0]) * fps
    vel[-1] = (pos[-1] - pos[-2]) * fps
    return vel


def estimate_velocities(
    frames: Sequence[Frame],
    fps: float,
    window: int = 1,
    max_speed: float = ModelParams.max_speed,
) -> list[Frame]:
    """Finite-difference velocities, centred moving average, then clamping.

    Player speeds are clamped to 1.5 x ``max_speed``; the disc is not clamped.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")
    if len(frames) < 2:
        raise TooFewFrames(f"need at least 2 frames to estimate velocities, got {len(frames)}")
    cap = 1.5 * max_speed

    player_vel = []
    for k in range(len(frames[0].players)):
        pos = np.array([fr.players[k].position for fr in frames], dtype=float)
        vel = _smooth(_differentiate(pos, fps), window)
        speed = np.hypot(vel[:, 0], vel[:, 1])
        scale = np.where(speed > cap, cap / np.where(speed > 0, speed, 1.0), 1.0)
        player_vel.append(vel * scale[:, None])
    disc_pos = np.array([fr.disc.position for fr in frames], dtype=float)
    disc_vel = _smooth(_differentiate(disc_pos, fps), window)

    out = []
    for t, fr in enumerate(frames):
        players = tuple(
            replace(p, velocity=(float(player_vel[k][t, 0]), float(player_vel[k][t, 1])))
            for k, p in enumerate(fr.players)
        )
        disc = replace(fr.disc, velocity=(float(disc_vel[t, 0]), float(disc_vel[t, 1])))
        out.append(replace(fr, players=players, disc=disc))
    return out


def identify_disc_holder(frame: Frame, params: ModelParams = ModelParams()) -> int | None:
    """Offensive player holding a slow disc, or None while it is in flight."""
    if math.hypot(*frame.disc.velocity) > params.hold_speed:
        return None
    dx, dy = frame.disc.position
    best: tuple[float, int] | None = None
    for p in frame.players:
        if p.team is not Team.OFFENSE:
            continue
        d = math.hypot(p.position.x - dx, p.position.y - dy)
        if best is None or (d, p.id) < best:
            best = (d, p.id)
    if best is None or best[0] > params.hold_radius:
        return None
    return best[1]


def holder_sequence(frames: Sequence[Frame], params: ModelParams = ModelParams()) -> list[int | None]:
    return [identify_disc_holder(fr, params) for fr in frames]


def passes_from_holders(holders: Sequence[int | None], frames: Sequence[Frame]) -> list[PassEvent]:
    """Turn a per-frame holder sequence into pass events.

    A pass is holder A, then at least one frame with no holder, then holder B
    with A != B. A direct A -> B switch without a flight frame is ignored.
    """
    passes = []
    last_holder: int | None = None
    last_frame = -1
    in_flight = False
    for t, h in enumerate(holders):
        if h is None:
            if last_holder is not None:
                in_flight = True
            continue
        if in_flight and h != last_holder:
            receiver = frames[t].player(h)
            passes.append(PassEvent(last_frame, t, last_holder, h, receiver.position))
        last_holder, last_frame, in_flight = h, t, False
    return passes


def detect_passes(frames: Sequence[Frame], params: ModelParams = ModelParams()) -> list[PassEvent]:
    return passes_from_holders(holder_sequence(frames, params), frames)


def last_n_passes(record: SetRecord, n: int = 3) -> list[tuple[PassEvent, PassRank]]:
    if not 1 <= n <= len(PassRank):
        raise ValueError(f"n must be in 1..{len(PassRank)}, got {n}")
    if not record.passes:
        raise NoPasses(f"set {record.set_id} has no passes")
    tail = list(record.passes[-n:])[::-1]
    return [(ev, PassRank(k + 1)) for k, ev in enumerate(tail)]
