"""Behavioural event sequences, interval partitioning and daily feature rows.

Timestamps are integer seconds. A monitoring period starts at ``origin`` and
is cut into ``n = ceil((monitoring_end - origin) / delta)`` contiguous
intervals; interval ``j`` (1-based) covers ``[b(j), f(j))`` with
``b(j) = origin + (j - 1) * delta``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Event",
    "EventSequence",
    "ObservationWindow",
    "DailyFeatureRow",
    "ValidationError",
    "FEATURE_NAMES",
    "partition_and_split",
    "extract_daily_features",
    "load_events",
    "save_events",
    "load_feature_rows",
    "save_feature_rows",
    "feature_matrix",
]

FEATURE_NAMES = ("z1", "z2", "z3", "z4", "z5")
EMPTY_LITERAL = "empty"


class ValidationError(ValueError):
    """Input violates a sequence or file-format invariant.

    ``line`` is the 1-based line number in the source file when the error
    comes from a parser.
    """

    def __init__(self, message: str, *, line: int | None = None, path: str | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.path = path


@dataclass(frozen=True, order=True)
class Event:
    """One occurrence of a behaviour.

    ``cut`` marks a fragment produced by boundary splitting: its ``end`` is the
    last second before the boundary (``boundary - 1``), so the covered span
    still reaches the boundary.
    """

    begin: int
    end: int
    kind: str = "sleep"
    cut: bool = False

    def __post_init__(self):
        if self.begin >= self.end + int(self.cut):
            raise ValidationError(
                f"event {self.kind!r} has begin={self.begin} >= end={self.end}"
            )

    @property
    def stop(self) -> int:
        """Exclusive end of the covered span."""
        return self.end + int(self.cut)

    @property
    def duration(self) -> int:
        return self.stop - self.begin


def _check_non_overlap(events: Sequence[Event]) -> None:
    for prev, cur in zip(events, events[1:]):
        if cur.begin < prev.begin:
            raise ValidationError(f"events not sorted by begin: {prev} before {cur}")
        if cur.begin < prev.stop:
            raise ValidationError(f"overlapping events: {prev} and {cur}")


@dataclass(frozen=True)
class EventSequence:
    events: tuple[Event, ...]
    monitoring_end: int
    delta: int = 86400
    origin: int = 0

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.delta <= 0:
            raise ValidationError(f"delta must be positive, got {self.delta}")
        if self.monitoring_end <= self.origin:
            raise ValidationError("monitoring_end must be after origin")
        _check_non_overlap(self.events)
        if self.events:
            if self.events[0].begin < self.origin:
                raise ValidationError(f"event {self.events[0]} starts before origin {self.origin}")
            if self.events[-1].stop > self.monitoring_end:
                raise ValidationError(
                    f"event {self.events[-1]} ends after monitoring_end {self.monitoring_end}"
                )

    @property
    def n_intervals(self) -> int:
        return math.ceil((self.monitoring_end - self.origin) / self.delta)

    def interval_start(self, j: int) -> int:
        """``b(j)`` for 1-based ``j``."""
        return self.origin + (j - 1) * self.delta


def partition_and_split(seq: EventSequence) -> list[list[Event]]:
    """Group events by interval, splitting those that cross a boundary.

    Returns exactly ``seq.n_intervals`` lists. A crossing event becomes a
    fragment ending one second before the boundary (flagged ``cut``) and a
    remainder that is propagated to the following intervals.
    """
    n = seq.n_intervals
    out: list[list[Event]] = [[] for _ in range(n)]
    for ev in seq.events:
        begin, stop = ev.begin, ev.stop
        j = (begin - seq.origin) // seq.delta
        while True:
            boundary = seq.origin + (j + 1) * seq.delta
            if stop <= boundary:
                if begin == ev.begin and stop == ev.stop:
                    out[j].append(ev)
                else:
                    out[j].append(Event(begin, stop, ev.kind))
                break
            out[j].append(Event(begin, boundary - 1, ev.kind, cut=True))
            begin = boundary
            j += 1
    return out


@dataclass(frozen=True)
class ObservationWindow:
    """Daily observation window as offsets (seconds) from the interval start."""

    start: int = 0
    end: int = 15 * 3600

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValidationError(f"invalid observation window [{self.start}, {self.end})")

    @classmethod
    def from_clock(cls, begin: str = "21:00", end: str = "12:00", interval_start: str = "21:00"):
        """Build a window from wall-clock times, e.g. 21:00 -> 12:00 next day."""
        def secs(s: str) -> int:
            parts = [int(p) for p in s.split(":")]
            parts += [0] * (3 - len(parts))
            return parts[0] * 3600 + parts[1] * 60 + parts[2]

        day = 86400
        start = (secs(begin) - secs(interval_start)) % day
        stop = (secs(end) - secs(interval_start)) % day
        if stop <= start:
            stop += day
        return cls(start, stop)


@dataclass(frozen=True)
class DailyFeatureRow:
    """Feature vector of one interval; ``features is None`` marks an empty interval."""

    interval_index: int
    features: tuple[float, ...] | None = field(default=None)

    @property
    def is_empty(self) -> bool:
        return self.features is None


def _window_events(events: Iterable[Event], lo: int, hi: int) -> list[tuple[int, int]]:
    spans = []
    for ev in events:
        b, f = max(ev.begin, lo), min(ev.stop, hi)
        if b < f:
            spans.append((b, f))
    spans.sort()
    return spans


def extract_daily_features(
    interval_events: Sequence[Sequence[Event]],
    window: ObservationWindow | None = None,
    *,
    origin: int = 0,
    delta: int = 86400,
) -> list[DailyFeatureRow]:
    """Compute ``[Z1..Z5]`` per interval from the events inside its window.

    Z1/Z2 are the first begin and last end in seconds from the window start,
    Z3 the summed event durations, Z4 the number of events and Z5 the summed
    gaps between consecutive events. Events are clipped to the window; a window
    with no events yields an empty row.
    """
    window = window or ObservationWindow()
    rows = []
    for idx, events in enumerate(interval_events):
        w0 = origin + idx * delta + window.start
        w1 = origin + idx * delta + window.end
        pool = list(events)
        if window.end > delta and idx + 1 < len(interval_events):
            pool += list(interval_events[idx + 1])
        spans = _window_events(pool, w0, w1)
        # fragments split at an interval boundary inside the window are one event
        merged: list[list[int]] = []
        for b, f in spans:
            if merged and b == merged[-1][1] and b > w0 and (b - origin) % delta == 0:
                merged[-1][1] = f
            else:
                merged.append([b, f])
        if not merged:
            rows.append(DailyFeatureRow(idx + 1, None))
            continue
        z1 = merged[0][0] - w0
        z2 = merged[-1][1] - w0
        z3 = sum(f - b for b, f in merged)
        z4 = len(merged)
        z5 = sum(merged[k + 1][0] - merged[k][1] for k in range(len(merged) - 1))
        rows.append(DailyFeatureRow(idx + 1, (float(z1), float(z2), float(z3), float(z4), float(z5))))
    return rows


def feature_matrix(rows: Sequence[DailyFeatureRow]) -> np.ndarray:
    """Stack rows into an ``n x m`` array with NaN rows for empty intervals."""
    m = next((len(r.features) for r in rows if not r.is_empty), len(FEATURE_NAMES))
    out = np.full((len(rows), m), np.nan)
    for i, r in enumerate(rows):
        if not r.is_empty:
            out[i] = r.features
    return out


# ---------------------------------------------------------------------------
# CSV formats


def save_events(seq: EventSequence, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "begin", "end"])
        for ev in seq.events:
            w.writerow([ev.kind, ev.begin, ev.stop])


def load_events(
    path: str | Path,
    format: str = "csv",
    *,
    delta: int = 86400,
    origin: int | None = None,
    monitoring_end: int | None = None,
    anchor: int = 21 * 3600,
) -> EventSequence:
    """Read an event CSV (``kind,begin,end``, integer epoch seconds).

    When ``origin`` is not given it is the last instant at wall-clock
    ``anchor`` (seconds after UTC midnight) not after the first event;
    ``monitoring_end`` defaults to the end of the interval holding the last
    event.
    """
    if format != "csv":
        raise ValidationError(f"unsupported event format {format!r}")
    path = str(path)
    events = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["kind", "begin", "end"]:
            raise ValidationError("expected header 'kind,begin,end'", line=1, path=path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValidationError(f"expected 3 fields, got {len(row)}", line=lineno, path=path)
            kind, b, f = row
            try:
                begin, end = int(b), int(f)
            except ValueError:
                raise ValidationError(f"non-integer timestamp in {row}", line=lineno, path=path) from None
            if begin >= end:
                raise ValidationError(f"begin {begin} >= end {end}", line=lineno, path=path)
            if events and begin < events[-1].stop:
                raise ValidationError(
                    f"event overlaps or precedes previous event {events[-1]}", line=lineno, path=path
                )
            events.append(Event(begin, end, kind))
    if origin is None:
        first = events[0].begin if events else 0
        origin = first - ((first - anchor) % 86400)
    if monitoring_end is None:
        last = events[-1].stop if events else origin + delta
        monitoring_end = origin + math.ceil((last - origin) / delta) * delta
    return EventSequence(tuple(events), monitoring_end, delta, origin)


def save_feature_rows(rows: Sequence[DailyFeatureRow], path: str | Path) -> None:
    """Feature CSV ``interval,z1..z5`` with 0-based interval indices."""
    m = next((len(r.features) for r in rows if not r.is_empty), len(FEATURE_NAMES))
    names = list(FEATURE_NAMES) if m == len(FEATURE_NAMES) else [f"z{h + 1}" for h in range(m)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["interval", *names])
        for r in rows:
            if r.is_empty:
                w.writerow([r.interval_index - 1, *([EMPTY_LITERAL] * m)])
            else:
                w.writerow([r.interval_index - 1, *(repr(float(v)) for v in r.features)])


def load_feature_rows(path: str | Path) -> list[DailyFeatureRow]:
    path = str(path)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "interval":
            raise ValidationError("expected header starting with 'interval'", line=1, path=path)
        m = len(header) - 1
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != m + 1:
                raise ValidationError(f"expected {m + 1} fields", line=lineno, path=path)
            try:
                j = int(row[0]) + 1
                if all(v == EMPTY_LITERAL for v in row[1:]):
                    rows.append(DailyFeatureRow(j, None))
                else:
                    rows.append(DailyFeatureRow(j, tuple(float(v) for v in row[1:])))
            except ValueError:
                raise ValidationError(f"malformed feature row {row}", line=lineno, path=path) from None
    return rows
