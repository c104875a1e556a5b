"""Confusion-matrix metrics, multi-run aggregation and random-search tuning."""

from __future__ import annotations

import csv
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .detector import PROFILES, DetectorConfig, DriftLabels, run
from .events import ValidationError

log = logging.getLogger(__name__)

__all__ = [
    "Confusion",
    "MetricReport",
    "score",
    "aggregate",
    "SearchSpace",
    "SPACES",
    "Trial",
    "TuneResult",
    "tune",
    "save_trials",
    "load_trials",
]


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def f1(self) -> float:
        den = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / den if den else 0.0

    @property
    def fpr(self) -> float:
        den = self.fp + self.tn
        return self.fp / den if den else 0.0

    @property
    def fnr(self) -> float:
        den = self.fn + self.tp
        return self.fn / den if den else 0.0


@dataclass(frozen=True)
class MetricReport:
    """Mean and standard deviation of F1/FPR/FNR over one or more runs."""

    f1: float
    fpr: float
    fnr: float
    runs: tuple[Confusion, ...]
    f1_std: float = 0.0
    fpr_std: float = 0.0
    fnr_std: float = 0.0

    @property
    def run_count(self) -> int:
        return len(self.runs)

    def to_dict(self) -> dict:
        return {
            "f1": self.f1,
            "fpr": self.fpr,
            "fnr": self.fnr,
            "f1_std": self.f1_std,
            "fpr_std": self.fpr_std,
            "fnr_std": self.fnr_std,
            "run_count": self.run_count,
            "confusion": [vars(c) for c in self.runs],
        }


def _binary(x, name) -> np.ndarray:
    a = np.asarray(getattr(x, "predicted", x)).reshape(-1)
    if a.size and not np.isin(a, (0, 1)).all():
        raise ValidationError(f"{name} must be binary")
    return a.astype(bool)


def confusion(pred, truth) -> Confusion:
    p = _binary(pred, "prediction")
    if isinstance(truth, DriftLabels) and truth.truth is not None:
        truth = truth.truth
    y = _binary(truth, "truth")
    if p.shape != y.shape:
        raise ValidationError(f"length mismatch: {p.size} predictions vs {y.size} labels")
    return Confusion(
        int(np.sum(p & y)), int(np.sum(p & ~y)), int(np.sum(~p & y)), int(np.sum(~p & ~y))
    )


def score(pred, truth) -> MetricReport:
    """Metrics of one run; F1, FPR and FNR are 0 when their denominators vanish."""
    c = confusion(pred, truth)
    return MetricReport(c.f1, c.fpr, c.fnr, (c,))


def aggregate(reports: Sequence[MetricReport]) -> MetricReport:
    runs = tuple(c for r in reports for c in r.runs)
    if not runs:
        raise ValidationError("nothing to aggregate")
    f1 = np.array([c.f1 for c in runs])
    fpr = np.array([c.fpr for c in runs])
    fnr = np.array([c.fnr for c in runs])
    return MetricReport(
        float(f1.mean()), float(fpr.mean()), float(fnr.mean()), runs,
        float(f1.std()), float(fpr.std()), float(fnr.std()),
    )


# ---------------------------------------------------------------------------
# tuning


@dataclass(frozen=True)
class SearchSpace:
    """Inclusive integer ranges for ``lam``/``ell``/``delta``, a real range for ``sigma``."""

    lam: tuple[int, int]
    ell: tuple[int, int]
    delta: tuple[int, int]
    sigma: tuple[float, float] = (0.05, 0.95)
    budget: int = 100
    seed: int | None = 0

    def __post_init__(self):
        for name in ("lam", "ell", "delta"):
            lo, hi = getattr(self, name)
            if int(lo) != lo or int(hi) != hi or lo > hi:
                raise ValidationError(f"bad {name} range {(lo, hi)}")
        if self.lam[0] < 0 or self.delta[0] < 1:
            raise ValidationError("lam must be >= 0 and delta >= 1")
        if self.ell[1] < 4 or self._even_ells() == []:
            raise ValidationError(f"ell range {self.ell} holds no even value >= 4")
        lo, hi = self.sigma
        if not 0.0 < lo <= hi < 1.0:
            raise ValidationError(f"sigma range {self.sigma} must lie inside (0, 1)")
        if self.budget < 1:
            raise ValidationError("budget must be >= 1")

    def _even_ells(self) -> list[int]:
        lo = max(4, self.ell[0] + (self.ell[0] % 2))
        return list(range(lo, self.ell[1] + 1, 2))

    def sample(self, rng: np.random.Generator) -> dict:
        return {
            "lam": int(rng.integers(self.lam[0], self.lam[1] + 1)),
            "ell": int(rng.choice(self._even_ells())),
            "delta": int(rng.integers(self.delta[0], self.delta[1] + 1)),
            "sigma": float(rng.uniform(*self.sigma)),
        }

    def contains(self, params: dict) -> bool:
        return (
            self.lam[0] <= params["lam"] <= self.lam[1]
            and params["ell"] in self._even_ells()
            and self.delta[0] <= params["delta"] <= self.delta[1]
            and self.sigma[0] <= params["sigma"] <= self.sigma[1]
        )


SPACES = {
    "realistic": SearchSpace(lam=(1, 180), ell=(4, 30), delta=(1, 10)),
    "synthetic": SearchSpace(lam=(1, 20), ell=(4, 20), delta=(1, 10)),
}


@dataclass(frozen=True)
class Trial:
    index: int
    params: dict
    mean_f1: float


@dataclass
class TuneResult:
    best: Trial
    trials: list[Trial] = field(default_factory=list)

    @property
    def best_config(self) -> DetectorConfig:
        return DetectorConfig(**self.best.params)


def _objective(params: dict, bundle) -> float:
    """Mean F1 over ``(Q, truth)`` pairs; configurations invalid for a member score 0."""
    scores = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cfg = DetectorConfig(**params)
    for Q, truth in bundle:
        try:
            pred = run(Q, cfg)
        except ValidationError:
            scores.append(0.0)
            continue
        scores.append(score(pred, truth).f1)
    return float(np.mean(scores))


def _trial_job(args):
    params, bundle = args
    return _objective(params, bundle)


def tune(
    bundle: Sequence[tuple[np.ndarray, np.ndarray]],
    space: SearchSpace,
    *,
    defaults: dict | str | None = None,
    jobs: int = 1,
    objective: Callable[[dict, Sequence], float] | None = None,
) -> TuneResult:
    """Uniform random search maximising mean F1 over the bundle.

    ``defaults`` (a parameter dict or profile name) is evaluated as trial 0
    and counts against the budget. Ties keep the earliest trial.
    """
    if not bundle:
        raise ValidationError("tuning bundle is empty")
    if isinstance(defaults, str):
        defaults = PROFILES[defaults]
    rng = np.random.default_rng(space.seed)
    candidates = []
    if defaults is not None:
        candidates.append({k: defaults[k] for k in ("lam", "ell", "delta", "sigma")})
    while len(candidates) < space.budget:
        candidates.append(space.sample(rng))
    objective = objective or _objective
    if jobs > 1 and objective is _objective:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(_trial_job, [(p, bundle) for p in candidates]))
    else:
        values = [objective(p, bundle) for p in candidates]
    trials = [Trial(i, p, v) for i, (p, v) in enumerate(zip(candidates, values))]
    best = trials[0]
    for tr in trials[1:]:
        if tr.mean_f1 > best.mean_f1:
            best = tr
    log.info("best trial %d: %s mean_f1=%.4f", best.index, best.params, best.mean_f1)
    return TuneResult(best, trials)


TRIAL_HEADER = ["trial", "lambda", "ell", "delta", "sigma", "mean_f1"]


def save_trials(trials: Sequence[Trial], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_HEADER)
        for tr in trials:
            p = tr.params
            w.writerow([tr.index, p["lam"], p["ell"], p["delta"], repr(float(p["sigma"])), repr(float(tr.mean_f1))])


def load_trials(path: str | Path) -> list[Trial]:
    path = str(path)
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != TRIAL_HEADER:
            raise ValidationError(f"expected header {','.join(TRIAL_HEADER)}", line=1, path=path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                idx, lam, ell, delta = (int(v) for v in row[:4])
                sigma, f1 = float(row[4]), float(row[5])
            except (ValueError, IndexError):
                raise ValidationError(f"malformed trial row {row}", line=lineno, path=path) from None
            if not math.isfinite(f1):
                raise ValidationError("non-finite objective", line=lineno, path=path)
            out.append(Trial(idx, {"lam": lam, "ell": ell, "delta": delta, "sigma": sigma}, f1))
    return out
