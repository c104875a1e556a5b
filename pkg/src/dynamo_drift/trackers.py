"""Hyperbox trackers over windows of trajectory rows.

Every tracker exposes ``track(w_prev, w_curr)``. ``w_prev`` may be ``None``
(no history yet in the current window fill); it is then read as ``w_curr``,
so the two-window trackers report zero evolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "EMPTY",
    "Tracker",
    "spans",
    "psi1_volume",
    "psi2_l2",
    "psi3_span_diff",
    "psi4_span_diff_l2",
    "PSI1",
    "PSI2",
    "PSI3",
    "PSI4",
    "DEFAULT_TRACKERS",
    "reading_to_json",
]

EMPTY = None


def _rows(w) -> np.ndarray:
    a = np.asarray(w, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.shape[0] == 0:
        raise ValueError("window must hold at least one row")
    return a


def spans(w) -> np.ndarray:
    a = _rows(w)
    return a.max(axis=0) - a.min(axis=0)


def psi1_volume(w) -> float:
    """Volume of the bounding hyperbox of the window rows."""
    vol = 1.0
    for s in spans(w):
        vol *= float(s)
    return vol


def psi2_l2(w) -> float:
    """L2 norm of the per-feature spans."""
    acc = 0.0
    for s in spans(w):
        acc += float(s) * float(s)
    return math.sqrt(acc)


def _pair(w1, w2) -> tuple[np.ndarray, np.ndarray]:
    b = _rows(w2)
    a = b if w1 is None else _rows(w1)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    return a, b


def psi3_span_diff(w1, w2) -> np.ndarray:
    """``m x 2`` matrix ``[max(w1) - max(w2), min(w1) - min(w2)]`` per feature."""
    a, b = _pair(w1, w2)
    return np.column_stack([a.max(axis=0) - b.max(axis=0), a.min(axis=0) - b.min(axis=0)])


def psi4_span_diff_l2(w1, w2) -> tuple[float, float]:
    """L2 norms of the max-difference and min-difference vectors."""
    g = psi3_span_diff(w1, w2)
    hi = lo = 0.0
    for dmax, dmin in g:
        hi += float(dmax) * float(dmax)
        lo += float(dmin) * float(dmin)
    return math.sqrt(hi), math.sqrt(lo)


@dataclass(frozen=True)
class Tracker:
    """A named ``track(w_prev, w_curr)`` callable.

    ``track`` returns a flat float array of components so that divergence
    tests can treat every tracker uniformly.
    """

    name: str
    fn: Callable
    two_window: bool

    def track(self, w_prev, w_curr) -> np.ndarray:
        if self.two_window:
            out = self.fn(w_prev, w_curr)
        else:
            out = self.fn(w_curr)
        return np.atleast_1d(np.asarray(out, dtype=float)).reshape(-1)

    def __repr__(self):
        return f"Tracker({self.name})"


PSI1 = Tracker("psi1", psi1_volume, two_window=False)
PSI2 = Tracker("psi2", psi2_l2, two_window=False)
PSI3 = Tracker("psi3", psi3_span_diff, two_window=True)
PSI4 = Tracker("psi4", psi4_span_diff_l2, two_window=True)
DEFAULT_TRACKERS = (PSI1, PSI2, PSI3, PSI4)


def reading_to_json(tracker: Tracker, reading: np.ndarray, m: int | None = None):
    if tracker is PSI3 and m is not None:
        return np.asarray(reading).reshape(m, 2).tolist()
    r = np.asarray(reading).tolist()
    return r[0] if len(r) == 1 else r
