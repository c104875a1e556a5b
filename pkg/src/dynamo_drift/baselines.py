"""Two-sample Kolmogorov-Smirnov test and KS-driven comparison detectors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .detector import DriftLabels, _as_matrix
from .events import ValidationError

__all__ = [
    "KSResult",
    "kolmogorov_sf",
    "ks_two_sample",
    "min_p_value",
    "kis",
    "ikssw",
    "iks_bdd",
    "BASELINES",
]


@dataclass(frozen=True)
class KSResult:
    statistic: float
    p_value: float
    n1: int
    n2: int


def kolmogorov_sf(x: float) -> float:
    """Survival function of the Kolmogorov distribution."""
    if x <= 0.0:
        return 1.0
    if x < 0.2:
        # series converges too slowly here; P(K > x) is 1 to double precision
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = math.exp(-2.0 * k * k * x * x)
        total += term if k % 2 else -term
        if term < 1e-18:
            break
    return min(1.0, max(0.0, 2.0 * total))


def _scaled(d: float, n1: int, n2: int) -> float:
    en = math.sqrt(n1 * n2 / (n1 + n2))
    return (en + 0.12 + 0.11 / en) * d


def min_p_value(n1: int, n2: int) -> float:
    """Smallest p-value reachable with these sample sizes (at ``D = 1``)."""
    return kolmogorov_sf(_scaled(1.0, n1, n2))


def ks_two_sample(a, b) -> KSResult:
    """Exact KS distance with an asymptotic p-value.

    The p-value uses the effective size ``n1 * n2 / (n1 + n2)`` and Stephens'
    small-sample scaling of the statistic.
    """
    x = np.sort(np.asarray(a, dtype=np.float64).reshape(-1))
    y = np.sort(np.asarray(b, dtype=np.float64).reshape(-1))
    if x.size == 0 or y.size == 0:
        raise ValidationError("KS test needs two nonempty samples")
    if np.isnan(x).any() or np.isnan(y).any():
        raise ValidationError("KS test samples contain NaN")
    d = float(_accel.ks_statistic(x, y))
    p = kolmogorov_sf(_scaled(d, x.size, y.size))
    return KSResult(d, p, int(x.size), int(y.size))


def kis(n: int, seed=None) -> DriftLabels:
    """Fair-coin label for every interval."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    rng = np.random.default_rng(seed)
    return DriftLabels(rng.integers(0, 2, size=n, dtype=np.uint8))


def _check(n: int, ell: int, delta: int) -> None:
    if int(ell) != ell or ell < 4 or ell % 2:
        raise ValidationError(f"ell must be an even integer >= 4, got {ell}")
    if int(delta) != delta or delta < 1:
        raise ValidationError(f"delta must be an integer >= 1, got {delta}")
    if ell > n // 2:
        raise ValidationError(f"ell={ell} exceeds floor(n/2)={n // 2} for n={n}")


COMBINE = ("any", "mean")


def _prepare(Q, combine: str) -> np.ndarray:
    """Feature matrix for the KS detectors.

    ``combine="any"`` keeps every feature (drift if any feature rejects);
    ``"mean"`` collapses each row to its mean and runs one test.
    """
    if combine not in COMBINE:
        raise ValidationError(f"unknown combination rule {combine!r}; expected one of {COMBINE}")
    X = _as_matrix(Q)
    return X.mean(axis=1, keepdims=True) if combine == "mean" else X


def _rejects(ref: np.ndarray, det: np.ndarray, alpha: float) -> bool:
    return any(ks_two_sample(ref[:, h], det[:, h]).p_value < alpha for h in range(ref.shape[1]))


def ikssw(Q, ell: int, delta: int, alpha: float = 0.01, combine: str = "any") -> DriftLabels:
    """Adjacent reference and detection windows of ``ell / 2`` rows sliding together.

    On rejection the detection window is labelled and becomes the reference;
    otherwise both windows move ``delta`` rows.
    """
    X = _prepare(Q, combine)
    n = X.shape[0]
    _check(n, ell, delta)
    half = ell // 2
    y = np.zeros(n, dtype=np.uint8)
    s = 0
    while s + 2 * half <= n:
        if _rejects(X[s: s + half], X[s + half: s + 2 * half], alpha):
            y[s + half: s + 2 * half] = 1
            s += half
        else:
            s += delta
    return DriftLabels(y)


def iks_bdd(Q, ell: int, delta: int, alpha: float = 0.01, combine: str = "any") -> DriftLabels:
    """Reference fixed at the first ``ell / 2`` rows; the detection window slides."""
    X = _prepare(Q, combine)
    n = X.shape[0]
    _check(n, ell, delta)
    half = ell // 2
    ref = X[:half]
    y = np.zeros(n, dtype=np.uint8)
    s = half
    while s + half <= n:
        if _rejects(ref, X[s: s + half], alpha):
            y[s: s + half] = 1
        s += delta
    return DriftLabels(y)


BASELINES = {"kis": kis, "ikssw": ikssw, "iks-bdd": iks_bdd}
