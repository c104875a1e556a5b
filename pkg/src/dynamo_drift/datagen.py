"""Seeded generator of nightly sleep sequences with an injected gradual drift.

Each simulated day starts at 21:00 and holds one night of sleep observed in
the 21:00 to 12:00 window: a sleep onset, a total sleep time split into
``count + 1`` events, and ``count`` interruptions in between. Bounded
quantities are drawn from normals truncated to their physical range, with
the untruncated parameters calibrated so that the truncated draws keep the
requested mean and standard deviation; when no truncated normal can reach the
requested spread a moment-matched lognormal is used instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .events import (
    Event,
    EventSequence,
    ObservationWindow,
    ValidationError,
    extract_daily_features,
    partition_and_split,
)

__all__ = [
    "RegimeSpec",
    "DriftSpec",
    "DatasetSpec",
    "PRESETS",
    "DEFAULT_START",
    "parse_clock",
    "format_clock",
    "generate",
    "stats",
    "load_spec",
    "spec_to_dict",
]

DAY = 86400
# 2020-01-01 21:00:00 UTC
DEFAULT_START = 1577912400
WINDOW = ObservationWindow(0, 15 * 3600)
SHAPES = ("linear", "step", "sawtooth")
FEATURES = ("duration", "interruptions", "onset")
MAX_TRIES = 10000


def parse_clock(s: str) -> int:
    """``"hh:mm[:ss]"`` to seconds."""
    parts = [int(p) for p in str(s).split(":")]
    if not 1 <= len(parts) <= 3:
        raise ValidationError(f"bad clock string {s!r}")
    parts += [0] * (3 - len(parts))
    return parts[0] * 3600 + parts[1] * 60 + parts[2]


def format_clock(seconds: float) -> str:
    s = int(round(seconds)) % DAY
    return f"{s // 3600:02d}:{s % 3600 // 60:02d}:{s % 60:02d}"


@dataclass(frozen=True)
class RegimeSpec:
    """Nightly sleep statistics.

    ``onset_*`` are seconds after the 21:00 window start, durations are hours,
    interruption totals are minutes per night.
    """

    onset_mean: float
    onset_std: float
    duration_mean: float
    duration_std: float
    interruptions_mean: float
    interruptions_std: float
    count_mean: float = 2.0
    count_std: float = 1.0

    def __post_init__(self):
        for name in ("onset_std", "duration_std", "interruptions_std", "count_std"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")
        if self.duration_mean <= 0:
            raise ValidationError("duration_mean must be > 0")
        if self.interruptions_mean <= 0 or self.count_mean < 1:
            raise ValidationError("every night needs at least one interruption of positive length")
        if not 0 <= self.onset_mean < WINDOW.end:
            raise ValidationError("onset_mean must fall inside the observation window")
        budget = (WINDOW.end - self.onset_mean) / 3600
        if self.duration_mean + self.interruptions_mean / 60 >= budget:
            raise ValidationError(
                f"mean sleep plus interruptions ({self.duration_mean:.2f} h) "
                f"does not fit before the window end ({budget:.2f} h after onset)"
            )

    @classmethod
    def from_clock(cls, onset: str, onset_std: str, duration: tuple, interruptions: tuple, count=(2.0, 1.0)):
        return cls(
            parse_clock(onset) - 21 * 3600,
            parse_clock(onset_std),
            *duration,
            *interruptions,
            *count,
        )


@dataclass(frozen=True)
class DriftSpec:
    fraction: float
    target: RegimeSpec
    features: tuple[str, ...] = ("duration",)
    shape: str = "linear"
    ramp: float = 0.15

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if not 0.0 < self.fraction < 1.0:
            raise ValidationError(f"drift fraction must lie in (0, 1), got {self.fraction}")
        if not self.features or any(f not in FEATURES for f in self.features):
            raise ValidationError(f"perturbed features must be a nonempty subset of {FEATURES}")
        if self.shape not in SHAPES:
            raise ValidationError(f"unknown transition shape {self.shape!r}")
        if not 0.0 < self.ramp <= 1.0:
            raise ValidationError("ramp must lie in (0, 1]")


@dataclass(frozen=True)
class DatasetSpec:
    days: int
    normal: RegimeSpec
    drift: DriftSpec | None = None
    start: int = DEFAULT_START
    name: str = "custom"

    def __post_init__(self):
        if self.days < 10:
            raise ValidationError("days must be >= 10")


def _preset(name, days, frac, onset, onset_std, dur, intr, ddur, dintr, features, count=2.0):
    normal = RegimeSpec.from_clock(onset, onset_std, dur, intr, (count, 1.0))
    dcount = count * dintr[0] / intr[0] if "interruptions" in features else count
    target = replace(
        normal,
        duration_mean=ddur[0], duration_std=ddur[1],
        interruptions_mean=dintr[0], interruptions_std=dintr[1],
        count_mean=dcount,
    )
    return DatasetSpec(days, normal, DriftSpec(frac, target, features), DEFAULT_START, name)


PRESETS: dict[str, DatasetSpec] = {
    "ELP1-D": _preset("ELP1-D", 1460, 0.40, "22:04:36", "00:37:54", (8.96, 1.24), (9.22, 3.76),
                      (9.22, 0.78), (9.17, 3.69), ("duration",)),
    "ELP1-I": _preset("ELP1-I", 1460, 0.40, "22:45:24", "00:09:01", (7.54, 0.22), (12.76, 8.05),
                      (7.52, 0.25), (15.19, 6.61), ("interruptions",)),
    "ELP2-D": _preset("ELP2-D", 1460, 0.40, "21:35:57", "00:57:31", (8.46, 1.51), (22.90, 11.82),
                      (8.73, 1.18), (23.06, 12.07), ("duration",)),
    "ELP2-I": _preset("ELP2-I", 1460, 0.40, "22:16:26", "00:43:56", (6.89, 0.93), (35.84, 18.93),
                      (6.86, 0.95), (39.61, 16.82), ("interruptions",)),
    "PH": _preset("PH", 170, 0.4706, "22:19:14", "00:50:32", (7.51, 1.37), (5.84, 20.86),
                  (7.08, 1.72), (10.86, 28.75), ("duration", "interruptions")),
    "AS": _preset("AS", 171, 0.4737, "22:23:39", "00:39:54", (7.31, 1.54), (4.64, 20.94),
                  (6.58, 1.84), (7.71, 28.86), ("duration", "interruptions")),
    "VK": _preset("VK", 151, 0.3933, "22:38:19", "00:49:29", (7.97, 3.37), (9.60, 68.16),
                  (9.11, 5.27), (25.31, 108.77), ("duration", "interruptions")),
}


# ---------------------------------------------------------------------------
# sampling


def _phi(x):
    return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def _Phi(x):
    return 0.5 * math.erfc(-x / math.sqrt(2))


def _truncnorm_moments(mu, sd, lo, hi):
    a, b = (lo - mu) / sd, (hi - mu) / sd
    z = _Phi(b) - _Phi(a)
    if z < 1e-12:
        return None
    pa, pb = _phi(a), _phi(b)
    ta = a * pa if math.isfinite(a) else 0.0
    tb = b * pb if math.isfinite(b) else 0.0
    mean = mu + sd * (pa - pb) / z
    var = sd * sd * (1 + (ta - tb) / z - ((pa - pb) / z) ** 2)
    return mean, math.sqrt(max(var, 0.0))


@lru_cache(maxsize=4096)
def _calibrate(mean, std, lo, hi):
    """Untruncated ``(mu, sd)`` whose truncation to ``[lo, hi]`` has the given moments.

    Returns ``None`` when no truncated normal reaches them.
    """
    mu, sd = mean, std
    for _ in range(500):
        got = _truncnorm_moments(mu, sd, lo, hi)
        if got is None:
            return None
        gm, gs = got
        if abs(gm - mean) < 1e-9 * max(1.0, abs(mean)) and abs(gs - std) < 1e-9 * max(1.0, std):
            return mu, sd
        if gs <= 0:
            return None
        mu += mean - gm
        sd *= std / gs
        if sd > 1e6 * max(std, 1.0) or not math.isfinite(mu):
            return None
    return None


class _Sampler:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def bounded(self, mean, std, lo, hi):
        """One draw with the requested moments, kept inside ``(lo, hi)``."""
        if std == 0:
            return mean
        cal = _calibrate(float(mean), float(std), float(lo), float(hi))
        if cal is None:
            if lo < 0 or mean <= 0:
                raise ValidationError(f"cannot realise mean={mean} std={std} within [{lo}, {hi}]")
            s2 = math.log1p((std / mean) ** 2)
            mu, sd = math.log(mean) - s2 / 2, math.sqrt(s2)
            draw = lambda: float(self.rng.lognormal(mu, sd))  # noqa: E731
        else:
            draw = lambda: float(self.rng.normal(*cal))  # noqa: E731
        for _ in range(MAX_TRIES):
            v = draw()
            if lo < v < hi:
                return v
        raise ValidationError(f"mean={mean} std={std} leaves almost no mass inside ({lo}, {hi})")

    def count(self, mean, std):
        if std == 0:
            return max(1, int(round(mean)))
        for _ in range(MAX_TRIES):
            c = int(round(float(self.rng.normal(mean, std))))
            if 1 <= c <= 48:
                return c
        raise ValidationError(f"interruption count mean={mean} std={std} is infeasible")


def _weight(i: int, span: int, drift: DriftSpec) -> float:
    ramp = max(1, int(math.floor(drift.ramp * span + 0.5)))
    if drift.shape == "step":
        return 1.0
    if drift.shape == "linear":
        return min(1.0, (i + 1) / ramp)
    return ((i % ramp) + 1) / ramp


def _day_regime(normal: RegimeSpec, drift: DriftSpec, w: float) -> RegimeSpec:
    mix = lambda a, b: (1 - w) * a + w * b  # noqa: E731
    t = drift.target
    kw = {}
    if "duration" in drift.features:
        kw.update(duration_mean=mix(normal.duration_mean, t.duration_mean),
                  duration_std=mix(normal.duration_std, t.duration_std))
    if "interruptions" in drift.features:
        kw.update(interruptions_mean=mix(normal.interruptions_mean, t.interruptions_mean),
                  interruptions_std=mix(normal.interruptions_std, t.interruptions_std),
                  count_mean=mix(normal.count_mean, t.count_mean),
                  count_std=mix(normal.count_std, t.count_std))
    if "onset" in drift.features:
        kw.update(onset_mean=mix(normal.onset_mean, t.onset_mean),
                  onset_std=mix(normal.onset_std, t.onset_std))
    return replace(normal, **kw)


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if k < extra else 0) for k in range(parts)]


def _night(sampler: _Sampler, r: RegimeSpec, day_start: int) -> list[Event]:
    end = WINDOW.end
    for _ in range(MAX_TRIES):
        onset = int(round(sampler.bounded(r.onset_mean, r.onset_std, WINDOW.start, end)))
        sleep = int(round(3600 * sampler.bounded(r.duration_mean, r.duration_std, 0.0, end / 3600)))
        count = sampler.count(r.count_mean, r.count_std)
        gaps = int(round(60 * sampler.bounded(r.interruptions_mean, r.interruptions_std, 0.0, end / 60)))
        if onset >= WINDOW.start and sleep >= count + 1 and gaps >= count and onset + sleep + gaps <= end:
            break
    else:
        raise ValidationError("regime is infeasible inside the observation window")
    events = []
    cursor = day_start + onset
    naps = _split(sleep, count + 1)
    pauses = _split(gaps, count)
    for k, dur in enumerate(naps):
        events.append(Event(cursor, cursor + dur, "sleep"))
        cursor += dur
        if k < count:
            cursor += pauses[k]
    return events


def generate(spec: DatasetSpec, seed=None) -> tuple[EventSequence, np.ndarray]:
    """Return the event sequence and the 0/1 ground truth per day."""
    rng = np.random.default_rng(seed)
    sampler = _Sampler(rng)
    days = spec.days
    span = 0 if spec.drift is None else int(math.floor(days * spec.drift.fraction + 0.5))
    first_drift = days - span
    events: list[Event] = []
    for d in range(days):
        regime = spec.normal
        if d >= first_drift:
            regime = _day_regime(spec.normal, spec.drift, _weight(d - first_drift, span, spec.drift))
        events.extend(_night(sampler, regime, spec.start + d * DAY))
    truth = np.zeros(days, dtype=np.uint8)
    truth[first_drift:] = 1
    seq = EventSequence(tuple(events), spec.start + days * DAY, DAY, spec.start)
    return seq, truth


# ---------------------------------------------------------------------------
# statistics


def _moments(values) -> dict:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return {"mean": None, "std": None}
    return {"mean": float(v.mean()), "std": float(v.std(ddof=1)) if v.size > 1 else 0.0}


def _period(rows) -> dict:
    feats = np.array([r.features for r in rows if not r.is_empty], dtype=float).reshape(-1, 5)
    onset = _moments(feats[:, 0])
    out = {
        "days": len(rows),
        "empty_days": sum(r.is_empty for r in rows),
        "duration_h": _moments(feats[:, 2] / 3600),
        "interruptions_min": _moments(feats[:, 4] / 60),
        "interruption_count": _moments(feats[:, 3] - 1),
        "onset_s": onset,
    }
    if onset["mean"] is not None:
        out["onset_clock"] = {
            "mean": format_clock(21 * 3600 + onset["mean"]),
            "std": format_clock(onset["std"]),
        }
    return out


def stats(seq: EventSequence, truth=None, window: ObservationWindow = WINDOW) -> dict:
    """Per-period means and standard deviations of the nightly statistics.

    The ``all`` block depends only on the events; ``normal`` and ``drift``
    blocks appear when a ground truth with drift days is given.
    """
    rows = extract_daily_features(partition_and_split(seq), window, origin=seq.origin, delta=seq.delta)
    table = {"all": _period(rows)}
    if truth is not None:
        truth = np.asarray(truth).reshape(-1)
        if truth.size != len(rows):
            raise ValidationError(f"truth length {truth.size} != {len(rows)} intervals")
        if truth.any():
            table["drift_fraction"] = float(truth.mean())
            table["normal"] = _period([r for r, y in zip(rows, truth) if not y])
            table["drift"] = _period([r for r, y in zip(rows, truth) if y])
    return table


# ---------------------------------------------------------------------------
# JSON spec files


def spec_to_dict(spec: DatasetSpec) -> dict:
    d = asdict(spec)
    if spec.drift is not None:
        d["drift"]["features"] = list(spec.drift.features)
    return d


def _regime(d: dict) -> RegimeSpec:
    d = dict(d)
    if "onset" in d:
        d["onset_mean"] = parse_clock(d.pop("onset")) - 21 * 3600
    if "onset_std_clock" in d:
        d["onset_std"] = parse_clock(d.pop("onset_std_clock"))
    try:
        return RegimeSpec(**d)
    except TypeError as exc:
        raise ValidationError(f"bad regime: {exc}") from None


def spec_from_dict(d: dict) -> DatasetSpec:
    d = dict(d)
    if "preset" in d:
        base = PRESETS.get(d.pop("preset"))
        if base is None:
            raise ValidationError(f"unknown preset; expected one of {sorted(PRESETS)}")
        over = {k: v for k, v in d.items() if k in ("days", "start", "name")}
        return replace(base, **over)
    try:
        drift = d.get("drift")
        if drift is not None:
            drift = dict(drift)
            drift["target"] = _regime(drift["target"])
            drift = DriftSpec(**drift)
        return DatasetSpec(
            days=int(d["days"]),
            normal=_regime(d["normal"]),
            drift=drift,
            start=int(d.get("start", DEFAULT_START)),
            name=str(d.get("name", "custom")),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad dataset spec: {exc}") from None


def load_spec(path: str | Path) -> DatasetSpec:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc.msg}", line=exc.lineno, path=str(path)) from None
    return spec_from_dict(raw)
