"""Glue from event sequences to trajectories and labelled evaluation bundles."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .datagen import PRESETS, DatasetSpec, generate
from .dynclust import ClusteringConfig, Trajectory, build_trajectory
from .events import DailyFeatureRow, EventSequence, ObservationWindow, extract_daily_features, partition_and_split

__all__ = ["featurize", "trajectory_from_events", "make_bundle"]


def featurize(seq: EventSequence, window: ObservationWindow | None = None) -> list[DailyFeatureRow]:
    return extract_daily_features(partition_and_split(seq), window, origin=seq.origin, delta=seq.delta)


def trajectory_from_events(
    seq: EventSequence,
    config: ClusteringConfig | None = None,
    window: ObservationWindow | None = None,
) -> Trajectory:
    return build_trajectory(featurize(seq, window), config)


def make_bundle(
    spec: DatasetSpec | str,
    seeds: Sequence[int],
    config: ClusteringConfig | None = None,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """``(Q, truth)`` pairs, one generated dataset per seed."""
    if isinstance(spec, str):
        spec = PRESETS[spec]
    out = []
    for s in seeds:
        seq, truth = generate(spec, seed=s)
        out.append((trajectory_from_events(seq, config).rows, truth))
    return out
