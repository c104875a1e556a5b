"""Divergence tests between reference and detection reading series, and consensus."""

from __future__ import annotations

import logging
import math
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _accel

log = logging.getLogger(__name__)

__all__ = [
    "mean_std",
    "total_variation",
    "gamma1",
    "gamma2",
    "DEFAULT_TESTS",
    "apply_tests",
    "consensus",
]


def total_variation(x) -> float:
    return _accel.total_variation(x)


def mean_std(x) -> tuple[float, float]:
    """Mean and population standard deviation; exactly ``(c, 0)`` for constants."""
    v = np.asarray(x, dtype=float).reshape(-1).tolist()
    lo, hi = min(v), max(v)
    if lo == hi:
        return lo, 0.0
    mu = math.fsum(v) / len(v)
    var = math.fsum((e - mu) ** 2 for e in v) / len(v)
    return mu, math.sqrt(var)


def _check(x, y):
    if len(x) != len(y):
        raise ValueError(f"series length mismatch: {len(x)} vs {len(y)}")


def gamma1(x, y) -> bool:
    """Reference total variation is at least the detection total variation."""
    _check(x, y)
    return total_variation(x) >= total_variation(y)


def gamma2(x, y) -> bool:
    """Detection mean lies strictly inside reference mean +/- one std."""
    _check(x, y)
    mx, sx = mean_std(x)
    my = math.fsum(np.asarray(y, dtype=float).reshape(-1).tolist()) / len(y)
    if sx == 0.0:
        log.debug("zero-variance reference series; gamma2 cannot hold")
    return mx - sx < my < mx + sx


DEFAULT_TESTS: tuple[Callable, ...] = (gamma1, gamma2)


def apply_tests(
    R: Mapping[str, np.ndarray],
    D: Mapping[str, np.ndarray],
    tests: Sequence[Callable] = DEFAULT_TESTS,
    quantifier: str = "any",
) -> np.ndarray:
    """Build the ``v x u`` drift-vote matrix.

    ``R[name]`` and ``D[name]`` are ``k x c`` arrays (``c`` components per
    reading). A test is evaluated per component; with ``quantifier="any"`` it
    succeeds when one component satisfies it, with ``"all"`` only when every
    component does. A failed test casts a drift vote.
    """
    if set(R) != set(D):
        raise ValueError(f"tracker key mismatch: {sorted(R)} vs {sorted(D)}")
    if quantifier not in ("any", "all"):
        raise ValueError(f"unknown quantifier {quantifier!r}")
    keys = list(R)
    Y = np.zeros((len(tests), len(keys)), dtype=np.int8)
    for t, gamma in enumerate(tests):
        for j, key in enumerate(keys):
            r = np.asarray(R[key], dtype=float)
            d = np.asarray(D[key], dtype=float)
            if r.ndim == 1:
                r, d = r[:, None], d[:, None]
            ok = [gamma(r[:, c], d[:, c]) for c in range(r.shape[1])]
            held = any(ok) if quantifier == "any" else all(ok)
            Y[t, j] = 0 if held else 1
    return Y


def consensus(Y, sigma: float) -> bool:
    """Drift when the average vote strictly exceeds ``sigma``."""
    Y = np.asarray(Y)
    return bool(Y.size and Y.sum() / Y.size > sigma)
