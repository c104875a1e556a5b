"""Pure-Python/numpy implementations of the hot kernels.

Reductions over feature columns run column by column so results are
bit-identical to the compiled kernels.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def window_extrema(Q: np.ndarray, lam: int) -> tuple[np.ndarray, np.ndarray]:
    """Column max/min of ``Q[max(0, j - lam) : j + 1]`` for every row ``j``."""
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    n, m = Q.shape
    cmax = np.empty((n, m))
    cmin = np.empty((n, m))
    head = min(lam + 1, n)
    cmax[:head] = np.maximum.accumulate(Q[:head], axis=0)
    cmin[:head] = np.minimum.accumulate(Q[:head], axis=0)
    if n > head:
        win = sliding_window_view(Q, lam + 1, axis=0)  # (n - lam, m, lam + 1)
        cmax[head:] = win[1:].max(axis=2)
        cmin[head:] = win[1:].min(axis=2)
    return cmax, cmin


def span_readings(Q: np.ndarray, lam: int):
    """Per-interval tracker inputs for the default ensemble.

    Returns ``vol (n,)``, ``l2 (n,)``, ``dmax (n, m)``, ``dmin (n, m)`` and
    ``dl2 (n, 2)`` where ``dmax[j]``/``dmin[j]`` compare the window ending at
    ``j - 1`` with the one ending at ``j`` (row 0 is zero).
    """
    cmax, cmin = window_extrema(Q, lam)
    n, m = cmax.shape
    span = cmax - cmin
    vol = np.ones(n)
    sq = np.zeros(n)
    for h in range(m):
        vol = vol * span[:, h]
        sq = sq + span[:, h] * span[:, h]
    l2 = np.sqrt(sq)
    dmax = np.zeros((n, m))
    dmin = np.zeros((n, m))
    if n > 1:
        dmax[1:] = cmax[:-1] - cmax[1:]
        dmin[1:] = cmin[:-1] - cmin[1:]
    hi = np.zeros(n)
    lo = np.zeros(n)
    for h in range(m):
        hi = hi + dmax[:, h] * dmax[:, h]
        lo = lo + dmin[:, h] * dmin[:, h]
    dl2 = np.column_stack([np.sqrt(hi), np.sqrt(lo)])
    return vol, l2, dmax, dmin, dl2


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Exact two-sample KS distance; ``a`` and ``b`` must be sorted."""
    n1, n2 = len(a), len(b)
    pooled = np.concatenate([a, b])
    ca = np.searchsorted(a, pooled, side="right")
    cb = np.searchsorted(b, pooled, side="right")
    return float(np.max(np.abs(ca / n1 - cb / n2)))


def total_variation(x) -> float:
    """Sum of absolute successive differences, accumulated left to right."""
    v = np.asarray(x, dtype=np.float64).reshape(-1).tolist()
    acc = 0.0
    for a, b in zip(v, v[1:]):
        acc += abs(b - a)
    return acc
