"""Trade-off analysis over swept fronts.

For every front the five cost components and the two totals are read at its
nondominated points; correlations between the eleven standard column pairs
are computed per front and averaged per instance class.  Undefined
correlations (a component constant along the front) are excluded from the
averages rather than zero-filled, which would bias them toward zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ShapeError

#: column pairs, in report order
PAIR_ORDER = (
    ("g1", "g4"), ("g4", "g5"), ("g1", "g5"), ("g2", "g4"), ("g3", "g4"),
    ("g2", "g5"), ("g3", "g5"), ("g1", "g2"), ("g1", "g3"), ("g2", "g3"),
    ("F1", "F2"),
)

DISTINCT_TOL = 1e-4       # objective-space separation that makes two points distinct
STRONG_THRESHOLD = 0.8    # |mean r| at or above this is flagged as strong


def pearson(a, b) -> float | None:
    """Product-moment correlation; ``None`` when either series is constant."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError("pearson series", a.shape, b.shape)
    if a.shape[0] < 2:
        raise ValueError("pearson needs at least two observations")
    am = a - a.mean()
    bm = b - b.mean()
    denom = float(np.sqrt((am @ am) * (bm @ bm)))
    if denom == 0.0:
        return None
    return float(min(1.0, max(-1.0, (am @ bm) / denom)))


def _pair(point) -> tuple[float, float]:
    if hasattr(point, "f1"):
        return float(point.f1), float(point.f2)
    return float(point[0]), float(point[1])


def count_distinct(points) -> int:
    """Greedy count of well-separated points along a filtered front.

    Expects the nondominated points sorted by ascending F1.  The first point
    is counted; each further point is counted only when both objective
    deltas against the last counted point reach ``DISTINCT_TOL``.
    """
    count = 0
    last: tuple[float, float] | None = None
    for p in points:
        pair = _pair(p)
        if last is None or (abs(pair[0] - last[0]) >= DISTINCT_TOL
                            and abs(pair[1] - last[1]) >= DISTINCT_TOL):
            count += 1
            last = pair
    return count


def masked_mean(values) -> tuple[float | None, int]:
    """Mean over the defined (non-``None``) entries and how many there were."""
    defined = [v for v in values if v is not None]
    if not defined:
        return None, 0
    return float(np.mean(defined)), len(defined)


def series_of(points) -> dict[str, np.ndarray]:
    """Columns g1..g5, F1, F2 evaluated over the given front points."""
    for p in points:
        if p.g is None:
            raise ValueError("front points must carry the five cost components")
    out = {f"g{i + 1}": np.array([p.g[i] for p in points]) for i in range(5)}
    out["F1"] = np.array([p.f1 for p in points])
    out["F2"] = np.array([p.f2 for p in points])
    return out


@dataclass(frozen=True)
class LabeledFront:
    """One front ready for analysis: provenance labels plus its points.

    ``points`` should be the filtered nondominated list, sorted by F1.
    """

    class_id: int | None
    instance: str
    method: str
    points: tuple


@dataclass(frozen=True)
class FrontCorrelations:
    class_id: int | None
    instance: str
    method: str
    r: dict          # (a, b) pair -> float | None


@dataclass(frozen=True)
class ClassSummary:
    class_id: int | None
    n_fronts: int
    mean_r: dict     # pair -> float | None
    defined: dict    # pair -> contributing front count
    strong: dict     # pair -> bool, |mean| >= STRONG_THRESHOLD


@dataclass(frozen=True)
class CorrelationReport:
    rows: tuple
    classes: tuple
    skipped: tuple = field(default_factory=tuple)


def build_report(fronts: list[LabeledFront]) -> CorrelationReport:
    """Per-front correlations for the eleven pairs plus per-class means.

    Fronts with fewer than two points cannot define a correlation; they are
    skipped and listed in ``report.skipped``.
    """
    rows: list[FrontCorrelations] = []
    skipped: list[tuple[str, str, str]] = []
    for front in fronts:
        if len(front.points) < 2:
            skipped.append((front.instance, front.method, "fewer than two points"))
            continue
        cols = series_of(front.points)
        r = {pair: pearson(cols[pair[0]], cols[pair[1]]) for pair in PAIR_ORDER}
        rows.append(FrontCorrelations(front.class_id, front.instance, front.method, r))

    classes: list[ClassSummary] = []
    for class_id in sorted({row.class_id for row in rows},
                           key=lambda v: (v is None, v)):
        members = [row for row in rows if row.class_id == class_id]
        mean_r: dict = {}
        defined: dict = {}
        strong: dict = {}
        for pair in PAIR_ORDER:
            mean, n = masked_mean([row.r[pair] for row in members])
            mean_r[pair] = mean
            defined[pair] = n
            strong[pair] = mean is not None and abs(mean) >= STRONG_THRESHOLD
        classes.append(ClassSummary(class_id, len(members), mean_r, defined, strong))
    return CorrelationReport(rows=tuple(rows), classes=tuple(classes),
                             skipped=tuple(skipped))


# -- CSV interchange --------------------------------------------------------

def _pair_column(pair: tuple[str, str]) -> str:
    return f"r_{pair[0]}_{pair[1]}"


CORRELATION_CSV_COLUMNS = (
    ("scope", "class", "instance", "method")
    + tuple(_pair_column(p) for p in PAIR_ORDER)
    + ("defined_count",)
)


def write_correlation_csv(report: CorrelationReport, path: str | Path) -> None:
    """One row per analyzed front plus one mean row per class.

    ``defined_count`` is the number of defined pair correlations for front
    rows, and the number of contributing fronts for class-mean rows.
    """
    def cell(value) -> str:
        return "" if value is None else repr(float(value))

    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CORRELATION_CSV_COLUMNS)
        for row in report.rows:
            cells = [cell(row.r[pair]) for pair in PAIR_ORDER]
            n_defined = sum(1 for pair in PAIR_ORDER if row.r[pair] is not None)
            writer.writerow(["front", _class_cell(row.class_id), row.instance,
                             row.method, *cells, n_defined])
        for summary in report.classes:
            cells = [cell(summary.mean_r[pair]) for pair in PAIR_ORDER]
            writer.writerow(["class_mean", _class_cell(summary.class_id), "", "",
                             *cells, summary.n_fronts])


def _class_cell(class_id) -> str:
    return "" if class_id is None else str(class_id)


@dataclass(frozen=True)
class RunStats:
    """Per-front run statistics, the raw material of the summary table."""

    class_id: int | None
    instance: str
    method: str
    nd: int
    time_s: float
    nv: int
    nc: int


STATS_CSV_COLUMNS = ("class", "method", "n", "nd", "time_s", "nv", "nc")


def summarize_stats(entries: list[RunStats]) -> list[dict]:
    """Average distinct counts, runtimes and problem shapes per class and method."""
    keys = sorted({(e.class_id, e.method) for e in entries},
                  key=lambda v: (v[0] is None, v[0], v[1]))
    out = []
    for class_id, method in keys:
        group = [e for e in entries if e.class_id == class_id and e.method == method]
        out.append({
            "class": class_id,
            "method": method,
            "n": len(group),
            "nd": float(np.mean([e.nd for e in group])),
            "time_s": float(np.mean([e.time_s for e in group])),
            "nv": float(np.mean([e.nv for e in group])),
            "nc": float(np.mean([e.nc for e in group])),
        })
    return out


def write_stats_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(STATS_CSV_COLUMNS)
        for row in rows:
            writer.writerow([_class_cell(row["class"]), row["method"], row["n"],
                             repr(row["nd"]), repr(row["time_s"]),
                             repr(row["nv"]), repr(row["nc"])])
