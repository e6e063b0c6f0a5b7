import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_frame
from uso.errors import MissingEntity, NonChronological, NonContiguousFrames, NoPasses, SchemaError, TooFewFrames
from uso.field_geometry import Homography, Point2D, bbox_center, BBox, project
from uso.params import ModelParams
from uso.synth import free_cut
from uso.tracking_io import (
    DiscState,
    Frame,
    Outcome,
    PassEvent,
    PassRank,
    PlayerState,
    SetRecord,
    Team,
    detect_passes,
    estimate_velocities,
    identify_disc_holder,
    last_n_passes,
    load_set,
    parse_events_csv,
    parse_tracking_csv,
    passes_from_holders,
    save_set,
)

HEADER = "frame,id,team,x,y\n"


def write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def two_frame_csv():
    rows = []
    for f in (0, 1):
        rows += [f"{f},3,O,12.5,4.0", f"{f},7,D,14.0,5.0", f"{f},-1,disc,12.5,4.0"]
    return HEADER + "\n".join(rows) + "\n"


class TestParseTracking:
    def test_schema_echo(self, tmp_path):
        frames = parse_tracking_csv(write(tmp_path, two_frame_csv()))
        assert len(frames) == 2
        p = frames[0].player(3)
        assert p.team is Team.OFFENSE and p.position == (12.5, 4.0)
        assert frames[1].time == pytest.approx(1 / 30)

    def test_non_contiguous(self, tmp_path):
        text = HEADER + "".join(f"{f},3,O,1,1\n{f},-1,disc,1,1\n" for f in (0, 1, 3))
        with pytest.raises(NonContiguousFrames):
            parse_tracking_csv(write(tmp_path, text))

    def test_two_disc_rows(self, tmp_path):
        text = HEADER + "0,3,O,1,1\n0,-1,disc,1,1\n0,-1,disc,2,2\n"
        with pytest.raises(SchemaError):
            parse_tracking_csv(write(tmp_path, text))

    def test_missing_entity(self, tmp_path):
        text = HEADER + "0,3,O,1,1\n0,-1,disc,1,1\n1,3,O,1,1\n"
        with pytest.raises(MissingEntity) as info:
            parse_tracking_csv(write(tmp_path, text))
        assert info.value.frame == 1 and info.value.entity_id == -1

    @pytest.mark.parametrize("body", ["0,3,X,1,1\n", "0,3,O,abc,1\n", "0,3,O,1\n", "0,5,disc,1,1\n"])
    def test_schema_errors(self, tmp_path, body):
        with pytest.raises(SchemaError) as info:
            parse_tracking_csv(write(tmp_path, HEADER + body))
        assert info.value.line == 2

    def test_bad_header(self, tmp_path):
        with pytest.raises(SchemaError):
            parse_tracking_csv(write(tmp_path, "f,i,t,x,y\n0,1,O,1,1\n"))

    def test_pixel_variant(self, tmp_path):
        h = Homography(np.array([[0.05, 0.001, 1.0], [0.002, 0.04, 0.5], [1e-5, 2e-5, 1.0]]))
        text = "frame,id,team,x1,y1,x2,y2\n0,1,O,100,200,120,260\n0,-1,disc,104,230,110,236\n"
        frames = parse_tracking_csv(write(tmp_path, text), homography=h)
        expected = project(h, bbox_center(BBox(100, 200, 120, 260)))
        assert frames[0].player(1).position == expected
        with pytest.raises(SchemaError):
            parse_tracking_csv(write(tmp_path, text))


class TestParseEvents:
    def test_echo(self, tmp_path):
        passes, outcome = parse_events_csv(write(tmp_path, "pass,120,151,2,5,41.0,12.0\noutcome,score\n"))
        assert passes == [PassEvent(120, 151, 2, 5, Point2D(41.0, 12.0))]
        assert outcome is Outcome.SCORE

    def test_reception_before_release(self, tmp_path):
        with pytest.raises(SchemaError):
            parse_events_csv(write(tmp_path, "pass,151,151,2,5,41,12\noutcome,turnover\n"))

    def test_non_chronological(self, tmp_path):
        text = "pass,100,120,2,5,1,1\npass,110,130,5,2,1,1\noutcome,score\n"
        with pytest.raises(NonChronological):
            parse_events_csv(write(tmp_path, text))

    @pytest.mark.parametrize("text", ["pass,1,2,3,4,5,6\n", "outcome,draw\n",
                                      "outcome,score\noutcome,score\n", "kick,1\noutcome,score\n"])
    def test_schema(self, tmp_path, text):
        with pytest.raises(SchemaError):
            parse_events_csv(write(tmp_path, text))


def _linear_frames(n, step, fps=30.0):
    return [make_frame([(1, "O", 10 + t * step, 5.0), (4, "D", 20.0, 5.0)], index=t, fps=fps) for t in range(n)]


class TestVelocities:
    def test_stationary(self):
        frames = estimate_velocities(_linear_frames(5, 0.0), 30.0, 3)
        assert all(p.velocity == (0.0, 0.0) for fr in frames for p in fr.players)

    def test_linear_motion(self):
        frames = estimate_velocities(_linear_frames(6, 2 / 30), 30.0, 1)
        for fr in frames[1:-1]:
            assert fr.player(1).velocity[0] == pytest.approx(2.0, abs=1e-12)

    def test_hand_value(self):
        frames = [make_frame([(1, "O", x, 0.0)], index=i) for i, x in enumerate((0.0, 0.1, 0.2))]
        out = estimate_velocities(frames, 30.0, 1)
        assert out[1].player(1).velocity[0] == pytest.approx(3.0, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-0.2, 0.2), st.floats(-0.2, 0.2), st.sampled_from([1, 3, 5, 7]), st.integers(8, 20))
    def test_uniform_translation_any_window(self, dx, dy, window, n):
        frames = [make_frame([(1, "O", 20 + t * dx, 10 + t * dy)], index=t) for t in range(n)]
        out = estimate_velocities(frames, 30.0, window, max_speed=100.0)
        for fr in out:
            assert fr.player(1).velocity == pytest.approx((dx * 30, dy * 30), abs=1e-9)

    def test_clamped(self):
        frames = estimate_velocities(_linear_frames(4, 1.0), 30.0, 1)  # 30 m/s
        speed = np.hypot(*frames[1].player(1).velocity)
        assert speed == pytest.approx(7.5)

    def test_errors(self):
        with pytest.raises(TooFewFrames):
            estimate_velocities(_linear_frames(1, 0.0), 30.0, 1)
        with pytest.raises(ValueError):
            estimate_velocities(_linear_frames(3, 0.0), 30.0, 2)


class TestHolder:
    def test_holder(self):
        fr = make_frame([(4, "O", 10.3, 10), (2, "O", 16, 10), (6, "D", 10, 10.2)], holder_id=4)
        fr = Frame(0, 0.0, fr.players, DiscState(Point2D(10.0, 10.0)))
        assert identify_disc_holder(fr) == 4

    def test_in_flight(self):
        fr = make_frame([(4, "O", 10, 10)], disc_velocity=(8.0, 0.0))
        assert identify_disc_holder(fr) is None

    def test_tie_lowest_id(self):
        players = (PlayerState(5, Team.OFFENSE, Point2D(10.5, 10)), PlayerState(2, Team.OFFENSE, Point2D(9.5, 10)))
        fr = Frame(0, 0.0, players, DiscState(Point2D(10, 10)))
        assert identify_disc_holder(fr) == 2

    def test_never_defense(self, rng):
        for _ in range(200):
            players = tuple(
                PlayerState(i, Team.OFFENSE if i < 3 else Team.DEFENSE, Point2D(*rng.uniform(0, 3, 2)))
                for i in range(6)
            )
            fr = Frame(0, 0.0, players, DiscState(Point2D(*rng.uniform(0, 3, 2))))
            h = identify_disc_holder(fr, ModelParams(hold_radius=2.0))
            assert h is None or fr.player(h).team is Team.OFFENSE


def _frames_for(n):
    return [make_frame([(2, "O", 1, 1), (5, "O", 9, 9), (7, "D", 4, 4)], index=i) for i in range(n)]


class TestDetectPasses:
    def test_pattern(self):
        passes = passes_from_holders([2, 2, None, None, 5, 5], _frames_for(6))
        assert passes == [PassEvent(1, 4, 2, 5, Point2D(9, 9))]

    @pytest.mark.parametrize("seq", [[2, 2, 2], [2, None, 2], [None, None]])
    def test_no_pass(self, seq):
        assert passes_from_holders(seq, _frames_for(len(seq))) == []

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.sampled_from([2, 5, None]), min_size=1, max_size=40))
    def test_invariants(self, seq):
        for ev in passes_from_holders(seq, _frames_for(len(seq))):
            assert ev.release_frame < ev.reception_frame
            assert ev.thrower_id != ev.receiver_id
            assert seq[ev.release_frame] == ev.thrower_id and seq[ev.reception_frame] == ev.receiver_id
            assert all(h is None for h in seq[ev.release_frame + 1: ev.reception_frame])

    def test_on_synthetic_set(self):
        record = free_cut()
        assert detect_passes(record.frames) == list(record.passes)


def _record(n_passes):
    frames = tuple(_frames_for(40))
    passes = tuple(PassEvent(5 * k, 5 * k + 2, 2 if k % 2 == 0 else 5, 5 if k % 2 == 0 else 2, Point2D(1, 1))
                   for k in range(n_passes))
    return SetRecord("s", 30.0, frames, passes, Outcome.SCORE)


class TestLastPasses:
    def test_five(self):
        rec = _record(5)
        out = last_n_passes(rec)
        assert [ev for ev, _ in out] == [rec.passes[4], rec.passes[3], rec.passes[2]]
        assert [r for _, r in out] == [PassRank.LAST, PassRank.SECOND_LAST, PassRank.THIRD_LAST]

    def test_two(self):
        assert [r for _, r in last_n_passes(_record(2))] == [PassRank.LAST, PassRank.SECOND_LAST]

    def test_none(self):
        with pytest.raises(NoPasses):
            last_n_passes(_record(0))


def test_set_round_trip(tmp_path):
    rec = free_cut()
    back = load_set(save_set(rec, tmp_path / rec.set_id), fps=rec.fps)
    assert back == rec


def test_set_invariants():
    with pytest.raises(ValueError):
        SetRecord("s", 30.0, tuple(_frames_for(5)), (PassEvent(1, 9, 2, 5, Point2D(0, 0)),), Outcome.SCORE)
    with pytest.raises(ValueError):
        SetRecord("s", 30.0, tuple(_frames_for(5)), (PassEvent(1, 2, 2, 7, Point2D(0, 0)),), Outcome.SCORE)
