import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynamo_drift.datagen import (
    PRESETS,
    DatasetSpec,
    DriftSpec,
    RegimeSpec,
    format_clock,
    generate,
    load_spec,
    parse_clock,
    spec_from_dict,
    spec_to_dict,
    stats,
)
from dynamo_drift.events import ValidationError, save_events

ELP1D = PRESETS["ELP1-D"]


def test_preset_values():
    n = ELP1D.normal
    assert ELP1D.days == 1460 and ELP1D.drift.fraction == 0.40
    assert format_clock(21 * 3600 + n.onset_mean) == "22:04:36"
    assert n.onset_std == parse_clock("00:37:54")
    assert (n.duration_mean, n.duration_std) == (8.96, 1.24)
    assert (n.interruptions_mean, n.interruptions_std) == (9.22, 3.76)
    t = ELP1D.drift.target
    assert (t.duration_mean, t.duration_std) == (9.22, 0.78)
    assert ELP1D.drift.features == ("duration",)


def test_clock_helpers():
    assert parse_clock("22:04:36") == 22 * 3600 + 4 * 60 + 36
    assert format_clock(parse_clock("07:05:09")) == "07:05:09"
    assert format_clock(86400 + 5) == "00:00:05"


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_truth_span_and_sequence_invariants(name):
    spec = PRESETS[name]
    seq, truth = generate(spec, seed=3)
    assert truth.size == spec.days == seq.n_intervals
    assert truth.sum() == math.floor(spec.days * spec.drift.fraction + 0.5)
    assert truth[-int(truth.sum()):].all() and not truth[: spec.days - int(truth.sum())].any()
    assert all(e.begin < e.end for e in seq.events)
    assert all(a.stop <= b.begin for a, b in zip(seq.events, seq.events[1:]))


def test_elp1d_drift_span():
    _, truth = generate(ELP1D, seed=0)
    assert int(truth.sum()) == 584


def test_same_seed_same_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    save_events(generate(ELP1D, seed=7)[0], a)
    save_events(generate(ELP1D, seed=7)[0], b)
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    save_events(generate(ELP1D, seed=8)[0], c)
    assert a.read_bytes() != c.read_bytes()


def test_zero_noise_is_periodic():
    calm = RegimeSpec(3600, 0, 8.0, 0, 10.0, 0, 2.0, 0)
    seq, truth = generate(DatasetSpec(20, calm, None), seed=1)
    assert not truth.any()
    nights = {}
    for e in seq.events:
        nights.setdefault((e.begin - seq.origin) // seq.delta, []).append(
            (e.begin - seq.interval_start((e.begin - seq.origin) // seq.delta + 1), e.duration))
    shapes = list(nights.values())
    assert len(shapes) == 20 and all(s == shapes[0] for s in shapes)


def test_normal_moments_within_three_standard_errors():
    seq, truth = generate(ELP1D, seed=0)
    s = stats(seq, truth)
    normal = s["normal"]
    N = normal["days"] - normal["empty_days"]
    for key, mean, std in [
        ("duration_h", 8.96, 1.24),
        ("interruptions_min", 9.22, 3.76),
        ("onset_s", ELP1D.normal.onset_mean, ELP1D.normal.onset_std),
    ]:
        tol = 3 * std / math.sqrt(N)
        assert abs(normal[key]["mean"] - mean) <= tol, key
        assert abs(normal[key]["std"] - std) <= tol, key
    assert s["drift_fraction"] == pytest.approx(0.4)


def test_stats_label_independent():
    seq, truth = generate(PRESETS["PH"], seed=0)
    assert stats(seq)["all"] == stats(seq, truth)["all"] == stats(seq, 1 - truth)["all"]
    assert set(stats(seq, np.zeros_like(truth))) == {"all"}


def test_infeasible_regime_rejected():
    with pytest.raises(ValidationError):
        RegimeSpec(14 * 3600, 0, 8.0, 1.0, 10.0, 1.0)
    with pytest.raises(ValidationError):
        DriftSpec(1.2, ELP1D.normal)
    with pytest.raises(ValidationError):
        DriftSpec(0.4, ELP1D.normal, shape="zigzag")


@pytest.mark.parametrize("shape", ["linear", "step", "sawtooth"])
def test_shapes_generate(shape):
    spec = replace(ELP1D, days=120, drift=replace(ELP1D.drift, shape=shape))
    seq, truth = generate(spec, seed=2)
    assert truth.sum() == 48 and seq.n_intervals == 120


def test_spec_dict_round_trip(tmp_path):
    import json
    d = spec_to_dict(ELP1D)
    assert spec_from_dict(json.loads(json.dumps(d))) == ELP1D
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"preset": "VK", "days": 90}))
    assert load_spec(p) == replace(PRESETS["VK"], days=90)
    p.write_text("{\n  broken")
    with pytest.raises(ValidationError) as info:
        load_spec(p)
    assert info.value.line == 2


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_any_seed_yields_valid_sequence(seed):
    spec = replace(PRESETS["VK"], days=40)
    seq, truth = generate(spec, seed=seed)
    assert truth.sum() == round(40 * spec.drift.fraction)
    assert all(a.stop <= b.begin for a, b in zip(seq.events, seq.events[1:]))
