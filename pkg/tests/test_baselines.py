import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from dynamo_drift.baselines import iks_bdd, ikssw, kis, kolmogorov_sf, ks_two_sample, min_p_value
from dynamo_drift.evaluation import score
from dynamo_drift.events import ValidationError

import oracle


def test_ks_examples():
    assert ks_two_sample([1, 2, 3], [1, 2, 3]).statistic == 0.0
    assert ks_two_sample([0, 0, 0], [1, 1, 1]).statistic == 1.0
    assert ks_two_sample([1, 2, 3, 4], [3, 4, 5, 6]).statistic == 0.5


def test_ks_statistic_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = rng.integers(0, 6, size=int(rng.integers(1, 30))).astype(float)
        b = rng.integers(0, 6, size=int(rng.integers(1, 30))).astype(float)
        assert ks_two_sample(a, b).statistic == pytest.approx(sps.ks_2samp(a, b).statistic, abs=1e-12)


def test_kolmogorov_tail_against_scipy():
    for x in (0.3, 0.5, 0.8, 1.0, 1.36, 1.63, 2.5):
        assert kolmogorov_sf(x) == pytest.approx(sps.kstwobign.sf(x), abs=1e-12)
    assert kolmogorov_sf(0.0) == 1.0


def test_min_p_value():
    assert min_p_value(3, 3) > 0.01
    assert min_p_value(8, 8) < 0.01
    assert ks_two_sample(np.zeros(8), np.ones(8)).p_value == min_p_value(8, 8)


def test_ks_rejects_empty_or_nan():
    with pytest.raises(ValidationError):
        ks_two_sample([], [1.0])
    with pytest.raises(ValidationError):
        ks_two_sample([np.nan], [1.0])


def test_kis_examples():
    assert kis(0, seed=1).n == 0
    assert kis(50, seed=4) == kis(50, seed=4)
    truth = np.r_[np.zeros(876), np.ones(584)]
    f1 = np.mean([score(kis(1460, seed=s), truth).f1 for s in range(30)])
    assert 0.43 <= f1 <= 0.49


def test_kis_mean_label_near_half():
    means = np.array([kis(1000, seed=s).predicted.mean() for s in range(40)])
    assert np.all(np.abs(means - 0.5) <= 3 * 0.5 / np.sqrt(1000))


def test_ikssw_flags_step():
    rng = np.random.default_rng(3)
    Q = rng.normal(size=(120, 2))
    Q[60:] += 4.0
    lab = ikssw(Q, 16, 2)
    assert lab.predicted[:52].sum() == 0
    assert lab.predicted[60:68].any()


def test_iks_bdd_flags_everything_after_step():
    rng = np.random.default_rng(3)
    Q = rng.normal(size=(120, 1))
    Q[60:] += 4.0
    lab = iks_bdd(Q, 16, 4)
    assert lab.predicted[68:].all()


def test_mean_combination_scalarises_rows():
    rng = np.random.default_rng(5)
    Q = rng.normal(size=(100, 3))
    Q[50:, 0] += 6.0
    assert ikssw(Q, 16, 4, combine="mean") == ikssw(Q.mean(axis=1), 16, 4)
    assert iks_bdd(Q, 16, 4, combine="mean") == iks_bdd(Q.mean(axis=1), 16, 4)
    with pytest.raises(ValidationError):
        ikssw(Q, 16, 4, combine="max")


def test_baseline_config_errors():
    Q = np.zeros((20, 1))
    with pytest.raises(ValidationError):
        ikssw(Q, 12, 2)
    with pytest.raises(ValidationError):
        iks_bdd(Q, 5, 2)


def test_noise_rejection_rate_near_alpha():
    rng = np.random.default_rng(42)
    rejections = sum(
        ks_two_sample(rng.normal(size=50), rng.normal(size=50)).p_value < 0.01 for _ in range(1000)
    )
    assert 5 <= rejections <= 20


@pytest.mark.slow
def test_noise_rejection_rate_tight():
    # 10k trials put the standard error near 0.001
    rng = np.random.default_rng(2)
    rate = np.mean([ks_two_sample(rng.normal(size=50), rng.normal(size=50)).p_value < 0.01
                    for _ in range(10000)])
    assert 0.008 <= rate <= 0.014


floats = st.lists(st.integers(-20, 20).map(float), min_size=1, max_size=20)


@given(floats, floats)
def test_ks_symmetric_and_matches_sweep(a, b):
    d = ks_two_sample(a, b).statistic
    assert d == ks_two_sample(b, a).statistic
    assert d == pytest.approx(oracle.ks_distance(a, b), abs=1e-12)


@given(floats, floats)
def test_ks_monotone_invariance(a, b):
    f = lambda v: np.exp(np.asarray(v) / 7.0) * 3 - 1
    assert ks_two_sample(f(a), f(b)).statistic == ks_two_sample(a, b).statistic
