"""Per-interval micro-clustering and densest-cluster trajectory assembly.

Each interval is clustered from scratch: points are absorbed by the closest
reachable micro-cluster (L-infinity reachability, L1 choice), micro-clusters
are labelled by forgetting-discounted density, dense regions are grown into
connected clusters, and the densest one contributes a trajectory row.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .events import DailyFeatureRow, ValidationError

log = logging.getLogger(__name__)

__all__ = [
    "Density",
    "MicroCluster",
    "DynamicCluster",
    "ClusteringConfig",
    "Trajectory",
    "reachable",
    "assign",
    "new_micro_cluster",
    "update_on_assign",
    "forgetting_factor",
    "classify_density",
    "boxes_connected",
    "connected_components",
    "densest_cluster",
    "cluster_interval",
    "build_trajectory",
    "save_trajectory_csv",
    "load_trajectory_csv",
    "save_trajectory_json",
]


class Density(enum.Enum):
    DENSE = "dense"
    SEMI = "semi"
    LOW = "low"


@dataclass(frozen=True)
class MicroCluster:
    """Micro-cluster ``(p, F, alpha, beta, d, O)`` with fixed box spans ``U``."""

    rows: np.ndarray  # p x m feature rows
    created_at: float
    last_assign: float
    spans: np.ndarray  # U, length m

    @property
    def count(self) -> int:
        return self.rows.shape[0]

    @property
    def centroid(self) -> np.ndarray:
        return self.rows.mean(axis=0)

    @property
    def density(self) -> float:
        return self.count / float(np.prod(self.spans))


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


def new_micro_cluster(point, spans, now: float) -> MicroCluster:
    p = _vec(point)
    spans = _vec(spans)
    if p.shape != spans.shape:
        raise ValueError(f"dimension mismatch: point {p.shape} vs spans {spans.shape}")
    return MicroCluster(p[None, :].copy(), now, now, spans)


def reachable(point, mc: MicroCluster) -> bool:
    """True iff ``|phi_h - O_h| < U_h / 2`` in every dimension."""
    p = _vec(point)
    if p.shape[0] != mc.spans.shape[0]:
        raise ValueError(f"dimension mismatch: {p.shape[0]} vs {mc.spans.shape[0]}")
    return bool(np.all(np.abs(p - mc.centroid) < mc.spans / 2.0))


def assign(point, candidates: Sequence[MicroCluster]) -> int | None:
    """Index of the closest reachable candidate in L1, lowest index on ties."""
    p = _vec(point)
    best, best_d = None, math.inf
    for k, mc in enumerate(candidates):
        if not reachable(p, mc):
            continue
        d = float(np.abs(p - mc.centroid).sum())
        if d < best_d:
            best, best_d = k, d
    return best


def update_on_assign(mc: MicroCluster, point, now: float) -> MicroCluster:
    p = _vec(point)
    if p.shape[0] != mc.rows.shape[1]:
        raise ValueError("dimension mismatch")
    return MicroCluster(np.vstack([mc.rows, p]), mc.created_at, now, mc.spans)


def forgetting_factor(now: float, last_assign: float, rate: float = 0.02) -> float:
    return math.exp(-rate * (now - last_assign))


def classify_density(
    mcs: Sequence[MicroCluster], now: float, rate: float = 0.02
) -> list[Density]:
    """Label micro-clusters against the median and mean discounted density.

    Dense needs to reach both the median and the mean, semi-dense only the
    median; everything under the median is low-density.
    """
    if not mcs:
        return []
    d = np.array([mc.density * forgetting_factor(now, mc.last_assign, rate) for mc in mcs])
    med, mean = float(np.median(d)), float(d.mean())
    labels = []
    for v in d:
        if v < med:
            labels.append(Density.LOW)
        elif v >= mean:
            labels.append(Density.DENSE)
        else:
            labels.append(Density.SEMI)
    return labels


@dataclass(frozen=True)
class DynamicCluster:
    members: tuple[MicroCluster, ...]
    interval_index: int
    cluster_index: int
    member_ids: tuple[int, ...] = ()

    @property
    def mean_density(self) -> float:
        return sum(mc.density for mc in self.members) / len(self.members)

    @property
    def centroid(self) -> np.ndarray:
        return np.mean([mc.centroid for mc in self.members], axis=0)


def boxes_connected(a: MicroCluster, b: MicroCluster, theta: int = 0) -> bool:
    """Boxes overlap in all but at most ``theta`` dimensions."""
    half = (a.spans + b.spans) / 2.0
    apart = int(np.sum(np.abs(a.centroid - b.centroid) >= half))
    return apart <= theta


def connected_components(
    mcs: Sequence[MicroCluster],
    labels: Sequence[Density],
    theta: int = 0,
    interval_index: int = 0,
) -> list[DynamicCluster]:
    """Group dense and semi-dense micro-clusters into connected clusters.

    Low-density micro-clusters take no part in the graph; a component is kept
    only if it holds at least one dense member.
    """
    nodes = [k for k, lab in enumerate(labels) if lab is not Density.LOW]
    seen: set[int] = set()
    clusters = []
    for start in nodes:
        if start in seen:
            continue
        comp, queue = [], deque([start])
        seen.add(start)
        while queue:
            k = queue.popleft()
            comp.append(k)
            for other in nodes:
                if other not in seen and boxes_connected(mcs[k], mcs[other], theta):
                    seen.add(other)
                    queue.append(other)
        comp.sort()
        if any(labels[k] is Density.DENSE for k in comp):
            clusters.append(
                DynamicCluster(
                    tuple(mcs[k] for k in comp), interval_index, len(clusters) + 1, tuple(comp)
                )
            )
    return clusters


def densest_cluster(clusters: Sequence[DynamicCluster]) -> DynamicCluster | None:
    """Cluster with the highest mean member density; ``None`` for no clusters."""
    best = None
    for c in clusters:
        if best is None or c.mean_density > best.mean_density:
            best = c
    return best


@dataclass(frozen=True)
class ClusteringConfig:
    span_fraction: float = 0.06
    theta: int = 0
    forgetting_rate: float = 0.02
    warmup: int = 15
    min_span: float = 1e-9
    normalise: bool = True

    def __post_init__(self):
        if self.span_fraction <= 0:
            raise ValueError("span_fraction must be positive")
        if self.theta < 0:
            raise ValueError("theta must be >= 0")
        if self.warmup < 1:
            raise ValueError("warmup must be >= 1")


def cluster_interval(
    points: np.ndarray,
    spans: np.ndarray,
    now: float,
    cfg: ClusteringConfig,
    times: Sequence[float] | None = None,
    interval_index: int = 0,
) -> tuple[list[MicroCluster], list[DynamicCluster]]:
    """Cluster one interval's points starting from an empty micro-cluster set."""
    mcs: list[MicroCluster] = []
    for i, p in enumerate(points):
        t = now if times is None else times[i]
        k = assign(p, mcs)
        if k is None:
            mcs.append(new_micro_cluster(p, spans, t))
        else:
            mcs[k] = update_on_assign(mcs[k], p, t)
    labels = classify_density(mcs, now, cfg.forgetting_rate)
    return mcs, connected_components(mcs, labels, cfg.theta, interval_index)


@dataclass
class Trajectory:
    """Trend trajectory: one densest-cluster centroid per interval.

    ``rows`` is in the normalised feature space used for clustering; ``raw``
    holds the same rows mapped back to the original feature units.
    """

    rows: np.ndarray
    raw: np.ndarray | None = None
    empty: np.ndarray | None = None
    scale_lo: np.ndarray | None = None
    scale_hi: np.ndarray | None = None
    config: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def m(self) -> int:
        return self.rows.shape[1]


def _scaler(warmup_rows: np.ndarray):
    lo = np.nanmin(warmup_rows, axis=0)
    hi = np.nanmax(warmup_rows, axis=0)
    rng = hi - lo
    scale = np.where(rng > 0, rng / 2.0, 1.0)
    mid = np.where(rng > 0, (hi + lo) / 2.0, lo)
    return lo, hi, mid, scale


def build_trajectory(
    rows: Sequence[DailyFeatureRow] | Sequence[np.ndarray],
    config: ClusteringConfig | None = None,
) -> Trajectory:
    """Assemble the trajectory ``Q`` from per-interval feature points.

    ``rows`` is either a list of :class:`DailyFeatureRow` (one point per
    interval) or a list of ``k_j x m`` arrays (``k_j = 0`` for empty
    intervals). Columns are min-max scaled to ``[-1, 1]`` over the warm-up
    intervals and box spans are a fixed fraction of that range. Empty
    intervals repeat the previous row.
    """
    cfg = config or ClusteringConfig()
    pts: list[np.ndarray] = []
    for r in rows:
        if isinstance(r, DailyFeatureRow):
            pts.append(np.empty((0, 0)) if r.is_empty else np.asarray(r.features, float)[None, :])
        else:
            a = np.asarray(r, dtype=float)
            pts.append(a.reshape(0, 0) if a.size == 0 else np.atleast_2d(a))
    dims = {p.shape[1] for p in pts if p.size}
    if len(dims) > 1:
        raise ValidationError(f"feature dimension mismatch across intervals: {sorted(dims)}")
    n = len(pts)
    if not dims:
        raise ValidationError("no non-empty interval to build a trajectory from")
    m = dims.pop()

    warm = [p for p in pts[: cfg.warmup] if p.size] or [p for p in pts if p.size]
    warm_rows = np.vstack(warm)
    if cfg.normalise:
        lo, hi, mid, scale = _scaler(warm_rows)
    else:
        lo, hi = warm_rows.min(axis=0), warm_rows.max(axis=0)
        mid, scale = np.zeros(m), np.ones(m)
    observed = (hi - lo) / scale
    spans = np.maximum(cfg.span_fraction * observed, cfg.min_span)

    Q = np.zeros((n, m))
    empty = np.zeros(n, dtype=bool)
    for j, p in enumerate(pts):
        if not p.size:
            empty[j] = True
            if j == 0:
                log.warning("first interval is empty; trajectory starts at zeros")
            else:
                Q[j] = Q[j - 1]
            continue
        scaled = (p - mid) / scale
        _, clusters = cluster_interval(scaled, spans, now=float(j + 1), cfg=cfg, interval_index=j + 1)
        best = densest_cluster(clusters)
        if best is None:
            empty[j] = True
            Q[j] = Q[j - 1] if j else 0.0
        else:
            Q[j] = best.centroid
    raw = Q * scale + mid
    return Trajectory(Q, raw, empty, lo, hi, config=asdict(cfg))


# ---------------------------------------------------------------------------
# export


def save_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["interval", *[f"q{h + 1}" for h in range(traj.m)]])
        for j, row in enumerate(traj.rows):
            w.writerow([j, *(repr(float(v)) for v in row)])


def load_trajectory_csv(path: str | Path) -> Trajectory:
    path = str(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "interval":
            raise ValidationError("expected header 'interval,q1..qm'", line=1, path=path)
        data = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                data.append([float(v) for v in row[1:]])
            except ValueError:
                raise ValidationError(f"malformed trajectory row {row}", line=lineno, path=path) from None
            if len(data[-1]) != len(header) - 1:
                raise ValidationError("wrong number of columns", line=lineno, path=path)
    return Trajectory(np.array(data, dtype=float).reshape(len(data), len(header) - 1))


def save_trajectory_json(traj: Trajectory, path: str | Path) -> None:
    doc = {
        "n": traj.n,
        "m": traj.m,
        "config": traj.config,
        "rows": traj.rows.tolist(),
    }
    if traj.empty is not None:
        doc["empty"] = [int(j) for j in np.flatnonzero(traj.empty)]
    if traj.scale_lo is not None:
        doc["scale"] = {"lo": traj.scale_lo.tolist(), "hi": traj.scale_hi.tolist()}
    Path(path).write_text(json.dumps(doc, indent=1), encoding="utf-8")
