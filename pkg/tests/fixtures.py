"""Hand-evaluated tracker and divergence cases.

Each entry is ``(name, thunk, expected)``; ``thunk()`` returns a value or
array compared with ``expected`` at 1e-9 absolute tolerance. Expected values
were worked out by hand from the tracker and test definitions.
"""

import math

import numpy as np

from dynamo_drift import divergence as dv
from dynamo_drift import trackers as tk

TOL = 1e-9

TRIANGLE = [[0, 0], [1, 2], [3, 1]]
W1 = [[0, 0], [2, 2]]
W2 = [[1, 1], [1, 1]]


def _ones_and_zeros(k, total=8):
    flat = np.zeros(total, dtype=np.int8)
    flat[:k] = 1
    return flat.reshape(2, total // 2)


def _tv_inversion_on_psi1():
    base = np.array([[1.0], [2.0], [3.0]])
    R = {"psi1": base, "psi2": base, "psi3": base, "psi4": base}
    D = dict(R, psi1=np.array([[0.0], [5.0], [0.0]]))
    return dv.apply_tests(R, D)


def _psi4_pair_max_only():
    R = {"psi4": np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])}
    D = {"psi4": np.array([[2.1, 9.0], [2.2, 9.0], [1.9, 9.0]])}
    return dv.apply_tests(R, D)


def _all_pass():
    s = np.array([[1.0], [2.0], [3.0]])
    R = {k: s for k in ("psi1", "psi2", "psi3", "psi4")}
    return dv.apply_tests(R, dict(R))


FIXTURES = [
    ("psi1 triangle", lambda: tk.psi1_volume(TRIANGLE), 6.0),
    ("psi1 single row", lambda: tk.psi1_volume([[4, 7]]), 0.0),
    ("psi1 collapsed dim", lambda: tk.psi1_volume([[0, 0], [0, 5]]), 0.0),
    ("psi2 triangle", lambda: tk.psi2_l2(TRIANGLE), math.sqrt(13.0)),
    ("psi2 triangle 4dp", lambda: round(tk.psi2_l2(TRIANGLE), 4), 3.6056),
    ("psi2 single row", lambda: tk.psi2_l2([[4, 7]]), 0.0),
    ("psi2 unit square", lambda: tk.psi2_l2([[0, 0], [0, 1], [1, 0], [1, 1]]), math.sqrt(2.0)),
    ("psi3 example", lambda: tk.psi3_span_diff(W1, W2), [[1.0, -1.0], [1.0, -1.0]]),
    ("psi3 self", lambda: tk.psi3_span_diff(W1, W1), [[0.0, 0.0], [0.0, 0.0]]),
    ("psi3 sentinel", lambda: tk.psi3_span_diff(tk.EMPTY, W1), [[0.0, 0.0], [0.0, 0.0]]),
    ("psi4 example", lambda: tk.psi4_span_diff_l2(W1, W2), [math.sqrt(2.0), math.sqrt(2.0)]),
    ("psi4 self", lambda: tk.psi4_span_diff_l2(W1, W1), [0.0, 0.0]),
    ("psi4 1-d", lambda: tk.psi4_span_diff_l2([[0], [4]], [[1], [1]]), [3.0, 1.0]),
    ("tv [1,2,3]", lambda: dv.total_variation([1, 2, 3]), 2.0),
    ("tv [0,5,0]", lambda: dv.total_variation([0, 5, 0]), 10.0),
    ("gamma1 no drift", lambda: dv.gamma1([1, 2, 3], [3, 3, 3]), True),
    ("gamma1 drift", lambda: dv.gamma1([0, 0, 0], [0, 5, 0]), False),
    ("gamma1 reflexive", lambda: dv.gamma1([4, 1, 7], [4, 1, 7]), True),
    ("mean/std [1,2,3]", lambda: dv.mean_std([1, 2, 3]), [2.0, math.sqrt(2.0 / 3.0)]),
    ("std [1,2,3] 4dp", lambda: round(dv.mean_std([1, 2, 3])[1], 4), 0.8165),
    ("mean y 4dp", lambda: round(dv.mean_std([2.1, 2.2, 1.9])[0], 4), 2.0667),
    ("gamma2 inside band", lambda: dv.gamma2([1, 2, 3], [2.1, 2.2, 1.9]), True),
    ("gamma2 zero variance", lambda: dv.gamma2([1, 1, 1], [1, 1, 1]), False),
    ("gamma2 far away", lambda: dv.gamma2([1, 2, 3], [40, 41, 42]), False),
    ("apply all pass", _all_pass, np.zeros((2, 4))),
    ("apply tv inversion psi1", _tv_inversion_on_psi1, [[1, 0, 0, 0], [0, 0, 0, 0]]),
    ("apply psi4 any-dimension", _psi4_pair_max_only, [[0], [0]]),
    ("consensus saturated", lambda: dv.consensus(np.ones((2, 4)), 0.5), True),
    ("consensus empty votes", lambda: dv.consensus(np.zeros((2, 4)), 0.01), False),
    ("vote mean 3/8", lambda: _ones_and_zeros(3).mean(), 0.375),
    ("consensus 3/8 synthetic", lambda: dv.consensus(_ones_and_zeros(3), 0.3422), True),
]


def check(thunk, expected):
    got = thunk()
    if isinstance(expected, bool):
        return isinstance(got, (bool, np.bool_)) and bool(got) is expected
    got = np.asarray(got, dtype=float)
    exp = np.asarray(expected, dtype=float)
    return got.shape == exp.shape and bool(np.all(np.abs(got - exp) <= TOL))
