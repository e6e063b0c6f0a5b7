"""Deterministic scripted 3v3 possessions used as fixtures and demos.

* ``static``: nobody moves and the disc never leaves the holder; three
  scripted pass labels give the evaluation something to window on.
* ``free_cut``: two dump passes, then a cutter sprints from midfield into the
  end zone unmarked for 60 frames and receives the final pass. Outcome Score.
* ``marked_holder``: a defender parked 2 m from a stationary holder while the
  other players jog; no passes.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from uso.field_geometry import THREES, FieldSpec, Point2D
from uso.params import ModelParams
from uso.tracking_io import (
    DiscState,
    Frame,
    Outcome,
    PassEvent,
    PlayerState,
    SetRecord,
    Team,
    estimate_velocities,
)

SCENARIOS = ("static", "free_cut", "marked_holder")

TEAMS = {1: Team.OFFENSE, 2: Team.OFFENSE, 3: Team.OFFENSE,
         4: Team.DEFENSE, 5: Team.DEFENSE, 6: Team.DEFENSE}


def _lerp(a, b, s: float) -> np.ndarray:
    return np.asarray(a, float) + (np.asarray(b, float) - np.asarray(a, float)) * s


class _Script:
    """Positions per player per frame plus a disc timeline."""

    def __init__(self, n_frames: int, start: dict[int, tuple[float, float]]):
        self.n = n_frames
        self.pos = {pid: np.tile(np.asarray(xy, float), (n_frames, 1)) for pid, xy in start.items()}
        self.holder: list[int | None] = [None] * n_frames
        self.passes: list[PassEvent] = []

    def move(self, pid: int, start: int, end: int, target) -> None:
        """Straight run from the position at ``start`` to ``target`` at ``end``; then stay."""
        origin = self.pos[pid][start].copy()
        for f in range(start, self.n):
            s = min(1.0, (f - start) / (end - start))
            self.pos[pid][f] = _lerp(origin, target, s)

    def hold(self, pid: int, start: int, end: int) -> None:
        for f in range(start, end + 1):
            self.holder[f] = pid

    def build(self, set_id: str, outcome: Outcome, params: ModelParams) -> SetRecord:
        fps = params.fps
        disc_pos = np.zeros((self.n, 2))
        disc_vel = np.zeros((self.n, 2))
        for f, h in enumerate(self.holder):
            if h is not None:
                disc_pos[f] = self.pos[h][f]
        # in-flight frames interpolate between the bracketing holders
        for ev in self.passes:
            a = self.pos[ev.thrower_id][ev.release_frame]
            b = self.pos[ev.receiver_id][ev.reception_frame]
            span = ev.reception_frame - ev.release_frame
            for f in range(ev.release_frame + 1, ev.reception_frame):
                if self.holder[f] is None:
                    disc_pos[f] = _lerp(a, b, (f - ev.release_frame) / span)
                    disc_vel[f] = (b - a) / (span / fps)
        frames = [
            Frame(f, f / fps,
                  tuple(PlayerState(pid, TEAMS[pid], Point2D(*map(float, self.pos[pid][f])))
                        for pid in sorted(self.pos)),
                  DiscState(Point2D(*map(float, disc_pos[f]))))
            for f in range(self.n)
        ]
        frames = estimate_velocities(frames, fps, 1, params.max_speed)
        frames = [
            replace(fr, disc=DiscState(fr.disc.position, (float(disc_vel[f, 0]), float(disc_vel[f, 1]))))
            for f, fr in enumerate(frames)
        ]
        return SetRecord(set_id, fps, tuple(frames), tuple(self.passes), outcome)

    def run(self, pid: int, start: int, velocity, fps: float) -> None:
        """Constant-velocity run from frame ``start`` to the end of the script."""
        origin = self.pos[pid][start].copy()
        for f in range(start, self.n):
            self.pos[pid][f] = origin + np.asarray(velocity, float) * ((f - start) / fps)

    def throw(self, thrower: int, receiver: int, release: int, params: ModelParams) -> int:
        """Schedule a real pass to where the receiver will be; returns the reception frame."""
        a = self.pos[thrower][release]
        n = 2
        while n < self.n - release - 1 and math.dist(a, self.pos[receiver][release + n]) / params.disc_speed * params.fps > n:
            n += 1
        reception = release + n
        for f in range(release + 1, reception):
            self.holder[f] = None
        self.passes.append(PassEvent(release, reception, thrower, receiver,
                                     Point2D(*map(float, self.pos[receiver][reception]))))
        return reception


def static(params: ModelParams = ModelParams(), field: FieldSpec = THREES) -> SetRecord:
    mid_x, mid_y = field.length / 2, field.width / 2
    start = {
        1: (mid_x, mid_y), 2: (mid_x + 8, mid_y - 5), 3: (mid_x + 8, mid_y + 5),
        4: (mid_x + 4, mid_y), 5: (mid_x + 10, mid_y - 4), 6: (mid_x + 10, mid_y + 4),
    }
    script = _Script(60, start)
    script.hold(1, 0, 59)
    # labels only: the disc stays with player 1
    for release, reception, thrower, receiver in ((30, 33, 1, 2), (40, 43, 2, 3), (50, 53, 3, 1)):
        script.passes.append(PassEvent(release, reception, thrower, receiver,
                                       Point2D(*map(float, script.pos[receiver][reception]))))
    return script.build("static", Outcome.TURNOVER, params)


def free_cut(params: ModelParams = ModelParams(), field: FieldSpec = THREES) -> SetRecord:
    mid_x, mid_y = field.length / 2, field.width / 2
    front = field.front_line_x
    start = {
        1: (mid_x, mid_y), 2: (mid_x + 3, mid_y - 6), 3: (mid_x - 5, mid_y + 5),
        4: (mid_x + 2, mid_y), 5: (mid_x - 4, mid_y + 3.5), 6: (field.length - 3, mid_y + 5),
    }
    run_start, release = 40, 99
    script = _Script(release + 60, start)
    script.hold(1, 0, script.n - 1)
    r1 = script.throw(1, 3, 4, params)
    script.hold(3, r1, script.n - 1)
    r2 = script.throw(3, 1, r1 + 4, params)
    script.hold(1, r2, script.n - 1)
    assert r2 < run_start
    # time the run so that the cutter's reaction-drift point reaches the
    # front line at the release frame; the catch then happens in the end zone
    aim = np.array([front - 0.2, mid_y - 1.0])
    lead = (release - run_start) / params.fps + params.reaction_time
    velocity = (aim - script.pos[2][run_start]) / lead
    script.run(2, run_start, velocity, params.fps)
    r3 = script.throw(1, 2, release, params)
    script.hold(2, r3, script.n - 1)
    script.n = r3 + 5
    script.pos = {pid: p[: script.n] for pid, p in script.pos.items()}
    script.holder = script.holder[: script.n]
    return script.build("free_cut", Outcome.SCORE, params)


def marked_holder(params: ModelParams = ModelParams(), field: FieldSpec = THREES) -> SetRecord:
    mid_y = field.width / 2
    start = {
        1: (20.0, mid_y), 2: (30.0, 4.0), 3: (30.0, 16.0),
        4: (22.0, mid_y), 5: (31.0, 5.0), 6: (31.0, 15.0),
    }
    script = _Script(60, start)
    script.hold(1, 0, 59)
    script.move(2, 0, 59, (36.0, 7.0))
    script.move(3, 0, 59, (36.0, 13.0))
    script.move(5, 0, 59, (37.0, 7.5))
    script.move(6, 0, 59, (37.0, 12.5))
    return script.build("marked_holder", Outcome.TURNOVER, params)


def make(scenario: str, params: ModelParams = ModelParams(), field: FieldSpec = THREES) -> SetRecord:
    builders = {"static": static, "free_cut": free_cut, "marked_holder": marked_holder}
    if scenario not in builders:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    return builders[scenario](params, field)
