"""Two-window drift detection over a trajectory of densest-cluster centroids.

Intervals are 1-based in the loop bookkeeping (``t``) and 0-based in arrays
and exported files.
"""

from __future__ import annotations

import csv
import json
import logging
import time
import warnings
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import _accel
from .divergence import DEFAULT_TESTS, apply_tests, consensus
from .events import ValidationError
from .trackers import DEFAULT_TRACKERS, Tracker

log = logging.getLogger(__name__)

__all__ = [
    "PROFILES",
    "DetectorConfig",
    "DriftLabels",
    "IterationRecord",
    "DriftEvent",
    "BehaviourSnapshot",
    "BehaviourQueue",
    "DetectionResult",
    "run",
    "run_detailed",
    "run_with_recurrence",
    "save_labels",
    "load_labels",
    "run_report",
]

PROFILES = {
    "realistic": {"lam": 25, "delta": 10, "ell": 30, "sigma": 0.2666},
    "synthetic": {"lam": 4, "delta": 4, "ell": 16, "sigma": 0.3422},
}


@dataclass(frozen=True)
class DetectorConfig:
    """Window and voting parameters.

    ``lam`` is the look-back (extra past intervals in each tracked window),
    ``ell`` the combined length of the reference and detection windows,
    ``delta`` the step taken when no drift is found and ``sigma`` the vote
    threshold.
    """

    lam: int
    ell: int
    delta: int
    sigma: float
    trackers: tuple[Tracker, ...] = DEFAULT_TRACKERS
    tests: tuple[Callable, ...] = DEFAULT_TESTS
    quantifier: str = "any"

    def __post_init__(self):
        object.__setattr__(self, "trackers", tuple(self.trackers))
        object.__setattr__(self, "tests", tuple(self.tests))
        if isinstance(self.ell, bool) or int(self.ell) != self.ell or self.ell < 4 or self.ell % 2:
            raise ValidationError(f"ell must be an even integer >= 4, got {self.ell}")
        if int(self.delta) != self.delta or self.delta < 1:
            raise ValidationError(f"delta must be an integer >= 1, got {self.delta}")
        if int(self.lam) != self.lam or self.lam < 0:
            raise ValidationError(f"lam must be an integer >= 0, got {self.lam}")
        if not 0.0 < self.sigma < 1.0:
            raise ValidationError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not self.trackers or not self.tests:
            raise ValidationError("tracker and test sets must be nonempty")
        if len({tr.name for tr in self.trackers}) != len(self.trackers):
            raise ValidationError("tracker names must be unique")
        if self.quantifier not in ("any", "all"):
            raise ValidationError(f"unknown quantifier {self.quantifier!r}")
        object.__setattr__(self, "lam", int(self.lam))
        object.__setattr__(self, "ell", int(self.ell))
        object.__setattr__(self, "delta", int(self.delta))
        object.__setattr__(self, "sigma", float(self.sigma))
        if self.delta > self.ell // 2:
            warnings.warn(
                f"delta={self.delta} exceeds half the window budget; intervals may be skipped",
                stacklevel=3,
            )

    @classmethod
    def profile(cls, name: str, **overrides) -> "DetectorConfig":
        if name not in PROFILES:
            raise ValidationError(f"unknown profile {name!r}; expected one of {sorted(PROFILES)}")
        return cls(**{**PROFILES[name], **overrides})

    def validate_for(self, n: int) -> None:
        if self.ell > n // 2:
            raise ValidationError(f"ell={self.ell} exceeds floor(n/2)={n // 2} for n={n}")
        if self.lam >= n:
            raise ValidationError(f"lam={self.lam} must be below n={n}")

    def to_dict(self) -> dict:
        return {
            "lam": self.lam,
            "ell": self.ell,
            "delta": self.delta,
            "sigma": self.sigma,
            "trackers": [tr.name for tr in self.trackers],
            "tests": [getattr(g, "__name__", repr(g)) for g in self.tests],
            "quantifier": self.quantifier,
        }

    @property
    def uses_default_ensemble(self) -> bool:
        return self.trackers == DEFAULT_TRACKERS


@dataclass(frozen=True, eq=False)
class DriftLabels:
    """Binary per-interval predictions with optional ground truth."""

    predicted: np.ndarray
    truth: np.ndarray | None = None

    def __post_init__(self):
        pred = np.array(self.predicted, dtype=np.uint8).reshape(-1)
        if pred.size and pred.max() > 1:
            raise ValidationError("labels must be binary")
        pred.setflags(write=False)
        object.__setattr__(self, "predicted", pred)
        if self.truth is not None:
            tr = np.array(self.truth, dtype=np.uint8).reshape(-1)
            if tr.shape != pred.shape:
                raise ValidationError(f"truth length {tr.size} != prediction length {pred.size}")
            if tr.size and tr.max() > 1:
                raise ValidationError("labels must be binary")
            tr.setflags(write=False)
            object.__setattr__(self, "truth", tr)

    @property
    def n(self) -> int:
        return int(self.predicted.size)

    def with_truth(self, truth) -> "DriftLabels":
        return DriftLabels(self.predicted, truth)

    def spans(self) -> list[tuple[int, int]]:
        """Maximal runs of positive predictions as 0-based inclusive pairs."""
        out = []
        start = None
        for i, v in enumerate(self.predicted):
            if v and start is None:
                start = i
            elif not v and start is not None:
                out.append((start, i - 1))
                start = None
        if start is not None:
            out.append((start, self.n - 1))
        return out

    def __eq__(self, other):
        if not isinstance(other, DriftLabels):
            return NotImplemented
        if not np.array_equal(self.predicted, other.predicted):
            return False
        if self.truth is None or other.truth is None:
            return self.truth is None and other.truth is None
        return np.array_equal(self.truth, other.truth)

    __hash__ = None


@dataclass(frozen=True)
class IterationRecord:
    t: int
    ell: int
    mean_vote: float
    drift: bool


@dataclass(frozen=True)
class BehaviourSnapshot:
    """Reference window adopted as normality: centroid rows and tracker readings."""

    start: int
    rows: np.ndarray
    readings: dict


class BehaviourQueue:
    """Bounded FIFO of past reference windows."""

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValidationError("queue capacity must be >= 0")
        self.capacity = capacity
        self._items: deque[BehaviourSnapshot] = deque(maxlen=capacity or None)

    def push(self, snap: BehaviourSnapshot) -> None:
        if self.capacity:
            self._items.append(snap)

    def __iter__(self):
        return iter(tuple(self._items))

    def __len__(self):
        return len(self._items)


@dataclass(frozen=True)
class DriftEvent:
    """One positive consensus; window bounds are 0-based inclusive."""

    start: int
    end: int
    recurrent: bool = False
    matched_start: int | None = None


@dataclass
class DetectionResult:
    labels: DriftLabels
    iterations: list[IterationRecord] = field(default_factory=list)
    drifts: list[DriftEvent] = field(default_factory=list)
    elapsed: float = 0.0
    backend: str = _accel.BACKEND


def _default_series(Q: np.ndarray, lam: int) -> dict[str, np.ndarray]:
    vol, l2, dmax, dmin, dl2 = _accel.span_readings(Q, lam)
    n, m = dmax.shape
    g = np.empty((n, 2 * m))
    g[:, 0::2] = dmax
    g[:, 1::2] = dmin
    return {"psi1": vol[:, None], "psi2": l2[:, None], "psi3": g, "psi4": dl2}


class _ReadingSource:
    """Tracker readings for one window fill over 0-based rows ``[s, s + k)``."""

    def __init__(self, Q: np.ndarray, cfg: DetectorConfig, use_kernels: bool):
        self.Q = Q
        self.cfg = cfg
        self.series = _default_series(Q, cfg.lam) if (use_kernels and cfg.uses_default_ensemble) else None

    def fill(self, s: int, k: int) -> dict[str, np.ndarray]:
        if self.series is not None:
            out = {}
            for tr in self.cfg.trackers:
                block = self.series[tr.name][s:s + k].copy()
                if tr.two_window:
                    block[0] = 0.0
                out[tr.name] = block
            return out
        lam = self.cfg.lam
        cols: dict[str, list] = {tr.name: [] for tr in self.cfg.trackers}
        w_prev = None
        for j in range(s, s + k):
            w_curr = self.Q[max(0, j - lam): j + 1]
            for tr in self.cfg.trackers:
                cols[tr.name].append(tr.track(w_prev, w_curr))
            w_prev = w_curr
        return {name: np.vstack(v) for name, v in cols.items()}


def _as_matrix(Q) -> np.ndarray:
    rows = getattr(Q, "rows", Q)
    a = np.ascontiguousarray(rows, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] == 0:
        raise ValidationError(f"trajectory must be a nonempty n x m matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("trajectory contains non-finite values")
    return a


def _scan(Q, cfg: DetectorConfig, *, use_kernels: bool = True, on_drift=None) -> DetectionResult:
    t0 = time.perf_counter()
    Q = _as_matrix(Q)
    n = Q.shape[0]
    cfg.validate_for(n)
    source = _ReadingSource(Q, cfg, use_kernels)
    yhat = np.zeros(n, dtype=np.uint8)
    records: list[IterationRecord] = []
    drifts: list[DriftEvent] = []
    t, ell = 1, cfg.ell
    while t <= n:
        if n - t + 1 < ell:
            ell = (n - t + 1) // 2
        if ell < 4:
            log.debug("window budget %d below 4 at t=%d; last %d intervals left unlabelled", ell, t, n - t + 1)
            break
        half = ell // 2
        s = t - 1
        R = source.fill(s, half)
        D = source.fill(s + half, half)
        Y = apply_tests(R, D, cfg.tests, cfg.quantifier)
        drift = consensus(Y, cfg.sigma)
        records.append(IterationRecord(t, ell, float(Y.mean()), drift))
        if drift:
            yhat[s + half: s + 2 * half] = 1
            ev = DriftEvent(s + half, s + 2 * half - 1)
            if on_drift is not None:
                ev = on_drift(ev, s, half, R, D)
            drifts.append(ev)
            t += half
        else:
            t += cfg.delta
    return DetectionResult(
        DriftLabels(yhat), records, drifts, time.perf_counter() - t0,
        _accel.BACKEND if source.series is not None else "generic",
    )


def run(Q, cfg: DetectorConfig, *, use_kernels: bool = True) -> DriftLabels:
    """Label each interval of ``Q`` (an ``n x m`` matrix or a Trajectory)."""
    return _scan(Q, cfg, use_kernels=use_kernels).labels


def run_detailed(Q, cfg: DetectorConfig, *, use_kernels: bool = True) -> DetectionResult:
    return _scan(Q, cfg, use_kernels=use_kernels)


def _windows_match(rows_a: np.ndarray, rows_b: np.ndarray, alpha: float) -> bool:
    from .baselines import ks_two_sample, min_p_value

    # samples too small to ever reject cannot confirm a match either
    if min_p_value(rows_a.shape[0], rows_b.shape[0]) >= alpha:
        return False
    for h in range(rows_a.shape[1]):
        if ks_two_sample(rows_a[:, h], rows_b[:, h]).p_value < alpha:
            return False
    return True


def run_with_recurrence(
    Q,
    cfg: DetectorConfig,
    queue_capacity: int = 8,
    *,
    alpha: float = 0.01,
    use_kernels: bool = True,
) -> DetectionResult:
    """Detection plus a check of each drift against past adopted normalities.

    On every drift the new detection window's centroid rows are compared, per
    feature, with each queued reference window using the two-sample KS test;
    a snapshot matches when no feature rejects at ``alpha``. Comparisons whose
    sample sizes could not produce a rejection at ``alpha`` never match. The
    current reference is queued after the comparison.
    """
    matrix = _as_matrix(Q)
    queue = BehaviourQueue(queue_capacity)

    def on_drift(ev: DriftEvent, s: int, half: int, R, D) -> DriftEvent:
        if not queue.capacity:
            return ev
        new_rows = matrix[s + half: s + 2 * half]
        hit = next((snap for snap in queue if _windows_match(snap.rows, new_rows, alpha)), None)
        queue.push(BehaviourSnapshot(s, matrix[s: s + half].copy(), R))
        if hit is None:
            return ev
        return DriftEvent(ev.start, ev.end, True, hit.start)

    return _scan(matrix, cfg, use_kernels=use_kernels, on_drift=on_drift)


# ---------------------------------------------------------------------------
# files


def save_labels(labels: DriftLabels, path: str | Path) -> None:
    """Label CSV ``interval,predicted[,truth]`` with 0-based intervals."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if labels.truth is None:
            w.writerow(["interval", "predicted"])
            for i, p in enumerate(labels.predicted):
                w.writerow([i, int(p)])
        else:
            w.writerow(["interval", "predicted", "truth"])
            for i, (p, y) in enumerate(zip(labels.predicted, labels.truth)):
                w.writerow([i, int(p), int(y)])


def load_labels(path: str | Path) -> DriftLabels:
    path = str(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header not in (["interval", "predicted"], ["interval", "predicted", "truth"]):
            raise ValidationError("expected header 'interval,predicted[,truth]'", line=1, path=path)
        pred, truth = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValidationError(f"expected {len(header)} fields", line=lineno, path=path)
            try:
                idx = int(row[0])
                vals = [int(v) for v in row[1:]]
            except ValueError:
                raise ValidationError(f"non-integer field in {row}", line=lineno, path=path) from None
            if idx != len(pred):
                raise ValidationError(f"expected interval {len(pred)}, got {idx}", line=lineno, path=path)
            if any(v not in (0, 1) for v in vals):
                raise ValidationError(f"labels must be 0 or 1: {row}", line=lineno, path=path)
            pred.append(vals[0])
            if len(vals) == 2:
                truth.append(vals[1])
    return DriftLabels(pred, truth if len(header) == 3 else None)


def run_report(cfg: DetectorConfig, result: DetectionResult, extra: dict | None = None) -> dict:
    """JSON-ready summary of one detection run.

    Wall time is left out so that repeated runs write identical reports.
    """
    report = {
        "config": cfg.to_dict(),
        "n": result.labels.n,
        "backend": result.backend,
        "iterations": [
            {"t": r.t, "ell": r.ell, "mean_vote": r.mean_vote, "drift": r.drift} for r in result.iterations
        ],
        "drift_spans": [list(sp) for sp in result.labels.spans()],
        "drifts": [
            {"start": d.start, "end": d.end, "recurrent": d.recurrent, "matched_start": d.matched_start}
            for d in result.drifts
        ],
    }
    if extra:
        report.update(extra)
    return report


def dump_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
