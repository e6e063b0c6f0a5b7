"""``uso`` command line: ingest, compute, evaluate, heatmap, synth.

Exit codes: 0 ok, 2 input, 3 compute, 4 evaluate, 5 config.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from uso import synth
from uso.config import RunConfig, read_config_file, resolve
from uso.errors import ComputeError, FrameOutOfRange, InputError, OutOfCourt, SchemaError, UsoError
from uso.evaluation import aggregate_report, render_report
from uso.export import write_grid
from uso.field_geometry import (
    Direction,
    Homography,
    Point2D,
    estimate_homography,
    read_correspondences,
    read_homography,
    standardize_direction,
)
from uso.pitch_control import GridSpec
from uso.tracking_io import (
    Outcome,
    PassEvent,
    SetRecord,
    detect_passes,
    estimate_velocities,
    load_set,
    parse_events_csv,
    parse_tracking_csv,
    save_set,
)
from uso.uso_metric import carried_holders, uso_field

log = logging.getLogger("uso")

LAYERS = ("ppcf_off", "ppcf_def", "w_area", "w_distance", "uso")


def _config(args: argparse.Namespace) -> RunConfig:
    file_values = read_config_file(args.config) if args.config else {}
    overrides = {
        "field": args.field,
        "fps": args.fps,
        "grid_cell": args.grid_cell,
        "threads": args.threads,
        "distance_weight": args.distance_weight,
    }
    return resolve(file_values, overrides)


def _grid(cfg: RunConfig) -> GridSpec:
    return GridSpec.for_field(cfg.field, cfg.params.grid_cell)


def _load(path: str, cfg: RunConfig) -> SetRecord:
    return load_set(path, fps=cfg.params.fps)


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace, cfg: RunConfig) -> int:
    homography: Homography | None = None
    if args.homography:
        homography = read_homography(args.homography)
    elif args.correspondences:
        homography = estimate_homography(read_correspondences(args.correspondences))

    fps = cfg.params.fps
    frames = parse_tracking_csv(args.tracking, fps=fps, homography=homography)
    direction = Direction(args.direction)
    frames = [standardize_direction(fr, direction, cfg.field) for fr in frames]
    frames = estimate_velocities(frames, fps, cfg.velocity_window, cfg.params.max_speed)

    if args.events:
        passes, outcome = parse_events_csv(args.events)
        if direction is Direction.MINUS_X:
            passes = [
                PassEvent(ev.release_frame, ev.reception_frame, ev.thrower_id, ev.receiver_id,
                          Point2D(cfg.field.length - ev.reception_point.x, ev.reception_point.y))
                for ev in passes
            ]
    else:
        if not args.outcome:
            raise SchemaError("without --events the set outcome must be given with --outcome")
        outcome = Outcome(args.outcome)
        passes = detect_passes(frames, cfg.params)
        log.info("detected %d passes", len(passes))

    set_id = args.set_id or Path(args.tracking).stem
    try:
        record = SetRecord(set_id, fps, tuple(frames), tuple(passes), outcome)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    out = save_set(record, Path(args.out) / set_id)
    cfg.write(args.out)
    print(out)
    return 0


def _uso_fields(record: SetRecord, cfg: RunConfig, frames: list[int]):
    holders = carried_holders(record.frames, cfg.params)
    grid = _grid(cfg)
    for f in frames:
        yield f, uso_field(record.frames[f], holders[f], grid, cfg.field, cfg.params,
                           cfg.distance_weight, cfg.threads)


def cmd_compute(args: argparse.Namespace, cfg: RunConfig) -> int:
    record = _load(args.set, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["frame,score,argmax_x,argmax_y\n"]
    for f, uf in _uso_fields(record, cfg, list(range(len(record.frames)))):
        lines.append(f"{f},{_fmt(uf.score)},{_fmt(uf.argmax.x)},{_fmt(uf.argmax.y)}\n")
        if args.dump_grids:
            write_grid(uf.values, out / "grids" / _grid_stem("uso", f))
    (out / "uso_series.csv").write_text("".join(lines))
    cfg.write(out)
    return 0


def _grid_stem(layer: str, frame: int) -> str:
    return f"{layer}_frame_{frame:05d}"


def cmd_evaluate(args: argparse.Namespace, cfg: RunConfig) -> int:
    records = [_load(p, cfg) for p in args.sets]
    records.sort(key=lambda r: r.set_id)
    report = aggregate_report(records, _grid(cfg), cfg.field, cfg.params, cfg.distance_weight, cfg.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    name = "report.md" if args.format == "markdown" else "report.csv"
    (out / name).write_text(render_report(report, args.format))
    meta = [f"excluded_window {sid} {rank.label}\n" for sid, rank in report.excluded_windows]
    meta += [f"skipped_set {sid}\n" for sid in report.skipped_sets]
    (out / "report_meta.txt").write_text("".join(meta))
    cfg.write(out)
    return 0


def cmd_heatmap(args: argparse.Namespace, cfg: RunConfig) -> int:
    record = _load(args.set, cfg)
    if not 0 <= args.frame < len(record.frames):
        raise FrameOutOfRange(f"frame {args.frame} outside 0..{len(record.frames) - 1}")
    (_, uf), = _uso_fields(record, cfg, [args.frame])
    layer = {
        "ppcf_off": uf.ppcf.offense,
        "ppcf_def": uf.ppcf.defense,
        "w_area": uf.w_area,
        "w_distance": uf.w_distance,
        "uso": uf.values,
    }[args.layer]
    out = Path(args.out)
    write_grid(layer, out / _grid_stem(args.layer, args.frame))
    cfg.write(out)
    return 0


def cmd_synth(args: argparse.Namespace, cfg: RunConfig) -> int:
    record = synth.make(args.scenario, cfg.params, cfg.field)
    print(save_set(record, Path(args.out) / record.set_id))
    cfg.write(args.out)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--field", help="threes | official | custom:L,W,E (default threes)")
    p.add_argument("--fps", type=float)
    p.add_argument("--grid-cell", type=float, dest="grid_cell")
    p.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    p.add_argument("--distance-weight", choices=("decreasing", "increasing"), dest="distance_weight")
    p.add_argument("--config", help="flat 'key = value' config file; flags override it")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uso", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="tracking + events -> canonical set directory")
    p.add_argument("tracking")
    p.add_argument("--events")
    p.add_argument("--homography", help="file with 9 numbers, row-major")
    p.add_argument("--correspondences", help="file with 'px py cx cy' lines")
    p.add_argument("--direction", choices=[d.value for d in Direction], default="plusx")
    p.add_argument("--outcome", choices=[o.value for o in Outcome])
    p.add_argument("--set-id", dest="set_id")
    _common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("compute", help="per-frame USO score series")
    p.add_argument("set")
    p.add_argument("--dump-grids", action="store_true", dest="dump_grids")
    _common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("evaluate", help="pass-window report over sets")
    p.add_argument("sets", nargs="+")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    _common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("heatmap", help="export one layer of one frame as CSV + PGM")
    p.add_argument("set")
    p.add_argument("--frame", type=int, required=True)
    p.add_argument("--layer", choices=LAYERS, default="uso")
    _common(p)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("synth", help="write a scripted scenario set")
    p.add_argument("scenario", choices=synth.SCENARIOS)
    _common(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except UsoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return InputError.exit_code
    except OutOfCourt as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ComputeError.exit_code


if __name__ == "__main__":
    sys.exit(main())
