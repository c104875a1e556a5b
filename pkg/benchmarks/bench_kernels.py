"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 1000 4000] [--repeat 5] [--json out.json]

Each row reports the best-of-``repeat`` wall time per backend and checks that
both backends return identical results.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
import time

import numpy as np

from dynamo_drift import _accel, _fallback
from dynamo_drift.baselines import ikssw
from dynamo_drift.detector import DetectorConfig, run

try:
    from dynamo_drift import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


@contextlib.contextmanager
def backend(module):
    saved = {name: getattr(_accel, name) for name in ("window_extrema", "span_readings", "ks_statistic", "total_variation")}
    try:
        for name in saved:
            setattr(_accel, name, getattr(module, name))
        yield
    finally:
        for name, fn in saved.items():
            setattr(_accel, name, fn)


def same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return a == b


def cases(n, rng):
    Q = rng.normal(size=(n, 5))
    x, y = np.sort(rng.normal(size=n)), np.sort(rng.normal(size=n))
    cfg = DetectorConfig.profile("realistic")
    return [
        ("span_readings", lambda k: k.span_readings(Q, 25)),
        ("ks_statistic", lambda k: k.ks_statistic(x, y)),
        ("total_variation", lambda k: k.total_variation(x)),
        ("detector run", lambda k: _with(k, lambda: run(Q, cfg).predicted.tobytes())),
        ("ikssw", lambda k: _with(k, lambda: ikssw(Q, 30, 10).predicted.tobytes())),
    ]


def _with(module, fn):
    with backend(module):
        return fn()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 4000, 16000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write the rows as JSON")
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not built; nothing to compare", file=sys.stderr)
        return 1
    rows = []
    print(f"{'kernel':<18}{'n':>8}{'cython s':>12}{'numpy s':>12}{'speedup':>10}  identical")
    for n in args.sizes:
        for name, fn in cases(n, np.random.default_rng(args.seed)):
            tc, oc = best_of(lambda: fn(_kernels), args.repeat)
            tp, op = best_of(lambda: fn(_fallback), args.repeat)
            row = {"kernel": name, "n": n, "cython": tc, "python": tp,
                   "speedup": tp / tc if tc else float("inf"), "identical": bool(same(oc, op))}
            rows.append(row)
            print(f"{name:<18}{n:>8}{tc:>12.5f}{tp:>12.5f}{row['speedup']:>9.1f}x  {row['identical']}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["identical"] for r in rows) else 2


if __name__ == "__main__":
    sys.exit(main())
