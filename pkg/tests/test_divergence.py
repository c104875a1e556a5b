import math
import statistics

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dynamo_drift import divergence as dv

from fixtures import FIXTURES, check

CASES = [f for f in FIXTURES if not f[0].startswith("psi")]


@pytest.mark.parametrize("name,thunk,expected", CASES, ids=[c[0] for c in CASES])
def test_fixture(name, thunk, expected):
    assert check(thunk, expected)


def test_population_std_is_used():
    x = [1.0, 2.0, 3.0, 4.0]
    assert dv.mean_std(x)[1] == pytest.approx(statistics.pstdev(x), abs=1e-12)
    assert dv.mean_std(x)[1] != pytest.approx(statistics.stdev(x))


def test_all_quantifier_differs_from_any():
    R = {"psi4": np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])}
    D = {"psi4": np.array([[2.1, 9.0], [2.2, 9.0], [1.9, 9.0]])}
    assert dv.apply_tests(R, D).tolist() == [[0], [0]]
    assert dv.apply_tests(R, D, quantifier="all").tolist() == [[0], [1]]


def test_key_mismatch_and_bad_quantifier():
    s = np.ones((3, 1))
    with pytest.raises(ValueError):
        dv.apply_tests({"a": s}, {"b": s})
    with pytest.raises(ValueError):
        dv.apply_tests({"a": s}, {"a": s}, quantifier="most")


def test_length_mismatch():
    with pytest.raises(ValueError):
        dv.gamma1([1, 2], [1, 2, 3])


# -- properties ---------------------------------------------------------------

series = st.lists(st.integers(-30, 30).map(float), min_size=2, max_size=12)


@given(series)
def test_gamma1_reflexive(x):
    assert dv.gamma1(x, x)


@given(series, series, st.lists(st.integers(0, 20).map(float), min_size=12, max_size=12))
def test_gamma1_monotone_in_oscillation(x, y, bumps):
    assume(len(x) == len(y))
    wiggly = [v + (b if k % 2 else -b) for k, (v, b) in enumerate(zip(y, bumps))]
    assume(dv.total_variation(wiggly) >= dv.total_variation(y))
    if not dv.gamma1(x, y):
        assert not dv.gamma1(x, wiggly)


@given(st.lists(st.integers(0, 1), min_size=8, max_size=8), st.integers(0, 7), st.floats(0.01, 0.99))
def test_consensus_monotone(bits, k, sigma):
    Y = np.array(bits).reshape(2, 4)
    raised = Y.copy()
    raised.flat[k] = 1
    if dv.consensus(Y, sigma):
        assert dv.consensus(raised, sigma)


@given(st.integers(1, 3), st.integers(1, 5), st.integers(2, 6), st.integers(1, 4), st.data())
@settings(max_examples=100)
def test_apply_tests_shape(v, u, k, c, data):
    tests = list(dv.DEFAULT_TESTS) * 2
    keys = [f"t{i}" for i in range(u)]
    draw = lambda: np.array(data.draw(st.lists(st.floats(-5, 5), min_size=k * c, max_size=k * c))).reshape(k, c)
    R = {key: draw() for key in keys}
    D = {key: draw() for key in keys}
    assert dv.apply_tests(R, D, tests[:v]).shape == (v, u)


@given(series)
def test_zero_variance_reference_never_holds(y):
    assert not dv.gamma2([2.5] * len(y), y)


def test_mean_std_agrees_with_statistics():
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = rng.normal(size=int(rng.integers(2, 30)))
        mu, sd = dv.mean_std(x)
        assert mu == statistics.fmean(x)
        assert math.isclose(sd, statistics.pstdev(x), rel_tol=1e-12)
