"""Unsupervised drift detection over behavioural event sequences."""

from ._accel import BACKEND
from .baselines import iks_bdd, ikssw, kis, ks_two_sample
from .datagen import PRESETS, DatasetSpec, DriftSpec, RegimeSpec, generate, stats
from .detector import DetectorConfig, DriftLabels, run, run_detailed, run_with_recurrence
from .dynclust import ClusteringConfig, Trajectory, build_trajectory
from .evaluation import SearchSpace, score, tune
from .events import Event, EventSequence, ObservationWindow, ValidationError
from .pipeline import featurize, make_bundle, trajectory_from_events

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ClusteringConfig",
    "DatasetSpec",
    "DetectorConfig",
    "DriftLabels",
    "DriftSpec",
    "Event",
    "EventSequence",
    "ObservationWindow",
    "PRESETS",
    "RegimeSpec",
    "SearchSpace",
    "Trajectory",
    "ValidationError",
    "build_trajectory",
    "featurize",
    "generate",
    "iks_bdd",
    "ikssw",
    "kis",
    "ks_two_sample",
    "make_bundle",
    "run",
    "run_detailed",
    "run_with_recurrence",
    "score",
    "stats",
    "trajectory_from_events",
    "tune",
]
