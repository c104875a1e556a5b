"""Naive, deliberately slow reference transcription of the detector.

Written against plain Python lists with 1-based interval indices and the
``statistics`` module, sharing no code with the package. Used to check the
optimised detector for bit-identical output.
"""

import math
import statistics


def _column(window, h):
    return [row[h] for row in window]


def _span(window, h):
    col = _column(window, h)
    return max(col) - min(col)


def volume(w_prev, w_curr):
    v = 1.0
    for h in range(len(w_curr[0])):
        v = v * _span(w_curr, h)
    return [v]


def l2(w_prev, w_curr):
    total = 0.0
    for h in range(len(w_curr[0])):
        s = _span(w_curr, h)
        total = total + s * s
    return [math.sqrt(total)]


def span_diff(w_prev, w_curr):
    if w_prev is None:
        w_prev = w_curr
    out = []
    for h in range(len(w_curr[0])):
        out.append(max(_column(w_prev, h)) - max(_column(w_curr, h)))
        out.append(min(_column(w_prev, h)) - min(_column(w_curr, h)))
    return out


def span_diff_l2(w_prev, w_curr):
    g = span_diff(w_prev, w_curr)
    hi = 0.0
    lo = 0.0
    for k in range(0, len(g), 2):
        hi = hi + g[k] * g[k]
        lo = lo + g[k + 1] * g[k + 1]
    return [math.sqrt(hi), math.sqrt(lo)]


TRACKERS = [volume, l2, span_diff, span_diff_l2]


def tv_test(x, y):
    tv_x = sum(abs(x[i] - x[i - 1]) for i in range(1, len(x)))
    tv_y = sum(abs(y[i] - y[i - 1]) for i in range(1, len(y)))
    return tv_x >= tv_y


def band_test(x, y):
    mu = statistics.fmean(x)
    sd = statistics.pstdev(x)
    my = statistics.fmean(y)
    return mu - sd < my < mu + sd


TESTS = [tv_test, band_test]


def _fill(Q, start, stop, lam):
    """Readings for 1-based intervals start..stop inclusive, per tracker."""
    readings = [[] for _ in TRACKERS]
    w_prev = None
    for j in range(start, stop + 1):
        w_curr = [Q[i - 1] for i in range(max(1, j - lam), j + 1)]
        for k, tracker in enumerate(TRACKERS):
            readings[k].append(tracker(w_prev, w_curr))
        w_prev = w_curr
    return readings


def _votes(R, D):
    Y = []
    for test in TESTS:
        row = []
        for r_series, d_series in zip(R, D):
            passed = False
            for c in range(len(r_series[0])):
                x = [reading[c] for reading in r_series]
                y = [reading[c] for reading in d_series]
                if test(x, y):
                    passed = True
            row.append(0 if passed else 1)
        Y.append(row)
    return Y


def detect(Q, lam, ell, delta, sigma):
    """0/1 label per interval for a list-of-lists trajectory ``Q``."""
    n = len(Q)
    y = [0] * (n + 1)
    t = 1
    while t <= n:
        if n - t + 1 < ell:
            ell = (n - t + 1) // 2
        if ell < 4:
            break
        half = ell // 2
        R = _fill(Q, t, t + half - 1, lam)
        D = _fill(Q, t + half, t + 2 * half - 1, lam)
        Y = _votes(R, D)
        votes = sum(sum(row) for row in Y)
        cells = sum(len(row) for row in Y)
        if votes / cells > sigma:
            for j in range(t + half, t + 2 * half):
                y[j] = 1
            t = t + half
        else:
            t = t + delta
    return y[1:]


def ks_distance(a, b):
    """Largest ECDF gap, swept over every pooled sample point."""
    best = 0.0
    for x in sorted(set(a) | set(b)):
        fa = sum(1 for v in a if v <= x) / len(a)
        fb = sum(1 for v in b if v <= x) / len(b)
        best = max(best, abs(fa - fb))
    return best
