from __future__ import annotations

import numpy as np
import pytest

from uso.field_geometry import THREES, Point2D
from uso.tracking_io import DiscState, Frame, PlayerState, Team


def make_frame(players, holder_id=None, index=0, disc_velocity=(0.0, 0.0), fps=30.0):
    """players: iterable of (id, 'O'|'D', x, y[, vx, vy]). Disc sits on the holder."""
    states = []
    for row in players:
        pid, team, x, y, *vel = row
        states.append(PlayerState(pid, Team(team), Point2D(float(x), float(y)),
                                  tuple(map(float, vel)) if vel else (0.0, 0.0)))
    states.sort(key=lambda p: p.id)
    if holder_id is None:
        holder_id = next(p.id for p in states if p.team is Team.OFFENSE)
    holder = next(p for p in states if p.id == holder_id)
    return Frame(index, index / fps, tuple(states), DiscState(holder.position, disc_velocity))


def random_frame(rng: np.random.Generator, field=THREES, max_speed=5.0, index=0):
    """3v3 frame; player 1 holds the disc, everyone else moves at up to max_speed."""
    players = []
    for pid in range(1, 7):
        team = "O" if pid <= 3 else "D"
        x, y = rng.uniform([0.0, 0.0], [field.length, field.width])
        if pid == 1:
            vx = vy = 0.0
        else:
            ang = rng.uniform(0, 2 * np.pi)
            speed = rng.uniform(0, max_speed)
            vx, vy = speed * np.cos(ang), speed * np.sin(ang)
        players.append((pid, team, x, y, vx, vy))
    return make_frame(players, holder_id=1, index=index)


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)
