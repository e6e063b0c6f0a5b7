"""Pass-window evaluation: USO before and at the last three passes of each set,
aggregated by pass rank and set outcome."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from uso.errors import InsufficientHistory, NoEvaluablePasses, OutOfCourt
from uso.field_geometry import FieldSpec
from uso.params import ModelParams
from uso.pitch_control import GridSpec
from uso.tracking_io import Outcome, PassEvent, PassRank, SetRecord, last_n_passes
from uso.uso_metric import UsoField, carried_holders, uso_field

HISTORY = 30
WINDOW = 10
REPORT_COLUMNS = (
    "pass_rank", "outcome", "mean_30_21", "mean_20_11", "mean_10_1",
    "dist_from_max_m", "uso_difference", "n_sets",
)


@dataclass(frozen=True)
class PassEvaluation:
    set_id: str
    rank: PassRank
    outcome: Outcome
    window_means: tuple[float, float, float] | None  # None: fewer than 30 prior frames
    dist_from_max: float
    uso_difference: float


def window_frames(release_frame: int) -> list[list[int]]:
    """Absolute frame indices of the 30-21, 20-11 and 10-1 windows."""
    return [
        [release_frame - k for k in range(hi, lo - 1, -1)]
        for hi, lo in ((30, 21), (20, 11), (10, 1))
    ]


def window_means(series: Sequence[float], release_frame: int) -> tuple[float, float, float]:
    """Mean USO score over the three 10-frame windows before a release.

    ``series[f]`` is the score of frame ``f``. The release frame itself is
    not part of any window.
    """
    if release_frame < HISTORY:
        raise InsufficientHistory(f"release at frame {release_frame} has fewer than {HISTORY} prior frames")
    if release_frame > len(series):
        raise IndexError(f"release frame {release_frame} beyond series of length {len(series)}")
    return tuple(math.fsum(series[f] for f in frames) / WINDOW for frames in window_frames(release_frame))


def pass_gap_metrics(field: UsoField, ev: PassEvent) -> tuple[float, float]:
    """(distance from the USO maximum to the catch point, USO shortfall there)."""
    g = field.grid
    px, py = ev.reception_point
    if not (g.origin.x <= px <= g.origin.x + g.nx * g.cell and g.origin.y <= py <= g.origin.y + g.ny * g.cell):
        raise OutOfCourt(f"reception point {tuple(ev.reception_point)} outside the grid")
    dist = math.hypot(field.argmax.x - px, field.argmax.y - py)
    return dist, field.score - field.value_at(ev.reception_point)


def evaluate_pass(
    set_id: str,
    rank: PassRank,
    outcome: Outcome,
    series: Sequence[float],
    release_field: UsoField,
    ev: PassEvent,
) -> PassEvaluation:
    try:
        means = window_means(series, ev.release_frame)
    except InsufficientHistory:
        means = None
    dist, diff = pass_gap_metrics(release_field, ev)
    return PassEvaluation(set_id, rank, outcome, means, dist, diff)


def evaluate_set(
    record: SetRecord,
    grid: GridSpec,
    field: FieldSpec,
    params: ModelParams = ModelParams(),
    distance_weight: str = "decreasing",
    threads: int = 1,
) -> list[PassEvaluation]:
    """Evaluate the last three passes of a set.

    Only the frames the windows and release instants need are computed.
    """
    ranked = last_n_passes(record, 3)
    holders = carried_holders(record.frames, params)
    needed = set()
    for ev, _ in ranked:
        needed.add(ev.release_frame)
        if ev.release_frame >= HISTORY:
            needed.update(range(ev.release_frame - HISTORY, ev.release_frame))
    fields = {
        f: uso_field(record.frames[f], holders[f], grid, field, params, distance_weight, threads)
        for f in sorted(needed)
    }
    series = [fields[f].score if f in fields else math.nan for f in range(len(record.frames))]
    return [
        evaluate_pass(record.set_id, rank, record.outcome, series, fields[ev.release_frame], ev)
        for ev, rank in ranked
    ]


# ---------------------------------------------------------------------------
# Aggregation and rendering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AggregateRow:
    rank: PassRank
    outcome: Outcome
    window_means: tuple[float, float, float] | None
    dist_from_max: float
    uso_difference: float
    n_sets: int
    n_windowed: int


@dataclass(frozen=True)
class AggregateReport:
    rows: tuple[AggregateRow, ...]
    # (set_id, rank) pairs whose pass had too little history for window means
    excluded_windows: tuple[tuple[str, PassRank], ...] = ()
    skipped_sets: tuple[str, ...] = ()


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def aggregate_evaluations(evaluations: Iterable[PassEvaluation]) -> AggregateReport:
    groups: dict[tuple[PassRank, Outcome], list[PassEvaluation]] = {}
    for e in evaluations:
        groups.setdefault((e.rank, e.outcome), []).append(e)
    rows = []
    for rank in (PassRank.THIRD_LAST, PassRank.SECOND_LAST, PassRank.LAST):
        for outcome in (Outcome.SCORE, Outcome.TURNOVER):
            group = groups.get((rank, outcome))
            if not group:
                continue
            windowed = [e.window_means for e in group if e.window_means is not None]
            means = tuple(_mean([w[k] for w in windowed]) for k in range(3)) if windowed else None
            rows.append(AggregateRow(
                rank, outcome, means,
                _mean([e.dist_from_max for e in group]),
                _mean([e.uso_difference for e in group]),
                len(group), len(windowed),
            ))
    excluded = sorted(
        ((e.set_id, e.rank) for es in groups.values() for e in es if e.window_means is None),
        key=lambda item: (item[0], item[1].value),
    )
    return AggregateReport(tuple(rows), tuple(excluded))


def aggregate_report(
    sets: Sequence[SetRecord],
    grid: GridSpec,
    field: FieldSpec,
    params: ModelParams = ModelParams(),
    distance_weight: str = "decreasing",
    threads: int = 1,
) -> AggregateReport:
    evaluations, skipped = [], []
    for record in sets:
        if not record.passes:
            skipped.append(record.set_id)
            continue
        evaluations.extend(evaluate_set(record, grid, field, params, distance_weight, threads))
    if not evaluations:
        raise NoEvaluablePasses("no set contains a pass")
    report = aggregate_evaluations(evaluations)
    return AggregateReport(report.rows, report.excluded_windows, tuple(sorted(skipped)))


def format_value(x: float | None) -> str:
    """Three decimals, halves rounded away from zero on the printed decimal."""
    if x is None or math.isnan(x):
        return "NA"
    return str(Decimal(repr(float(x))).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


def _cells(row: AggregateRow) -> list[str]:
    means = row.window_means or (None, None, None)
    return [
        row.rank.label, row.outcome.label, *(format_value(m) for m in means),
        format_value(row.dist_from_max), format_value(row.uso_difference), str(row.n_sets),
    ]


def render_report(report: AggregateReport, fmt: str = "csv") -> str:
    if fmt == "csv":
        lines = [",".join(REPORT_COLUMNS)]
        lines += [",".join(_cells(r)) for r in report.rows]
    elif fmt == "markdown":
        lines = ["| " + " | ".join(REPORT_COLUMNS) + " |",
                 "|" + "|".join(["---"] * len(REPORT_COLUMNS)) + "|"]
        lines += ["| " + " | ".join(_cells(r)) + " |" for r in report.rows]
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return "\n".join(lines) + "\n"
