"""Command-line entry point: ``dynamo-drift <command> [options]``.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
Failures print a JSON object ``{"stage", "message", "path", "line"}`` to
stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .baselines import iks_bdd, ikssw, kis
from .datagen import PRESETS, generate, load_spec, spec_to_dict, stats
from .detector import (
    PROFILES,
    DetectorConfig,
    DriftLabels,
    dump_report,
    load_labels,
    run_detailed,
    run_report,
    run_with_recurrence,
    save_labels,
)
from .dynclust import (
    ClusteringConfig,
    build_trajectory,
    load_trajectory_csv,
    save_trajectory_csv,
    save_trajectory_json,
)
from .evaluation import SPACES, SearchSpace, aggregate, save_trials, score, tune
from .events import (
    FEATURE_NAMES,
    ObservationWindow,
    ValidationError,
    load_events,
    load_feature_rows,
    save_events,
    save_feature_rows,
)
from .pipeline import featurize

log = logging.getLogger("dynamo_drift")

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "profile": {"enum": sorted(PROFILES)},
        "lam": {"type": "integer", "minimum": 0},
        "ell": {"type": "integer", "minimum": 4, "multipleOf": 2},
        "delta": {"type": "integer", "minimum": 1},
        "sigma": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "quantifier": {"enum": ["any", "all"]},
        "queue_capacity": {"type": "integer", "minimum": 0},
        "clustering": {
            "type": "object",
            "properties": {
                "span_fraction": {"type": "number", "exclusiveMinimum": 0},
                "theta": {"type": "integer", "minimum": 0},
                "forgetting_rate": {"type": "number", "minimum": 0},
                "warmup": {"type": "integer", "minimum": 1},
                "min_span": {"type": "number", "exclusiveMinimum": 0},
                "normalise": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "window": {
            "type": "object",
            "properties": {
                "begin": {"type": "string", "pattern": r"^\d{1,2}:\d{2}(:\d{2})?$"},
                "end": {"type": "string", "pattern": r"^\d{1,2}:\d{2}(:\d{2})?$"},
            },
            "additionalProperties": False,
        },
        "baseline": {"enum": ["kis", "ikssw", "iks-bdd"]},
        "baseline_ell": {"type": "integer", "minimum": 4, "multipleOf": 2},
        "baseline_delta": {"type": "integer", "minimum": 1},
        "baseline_combine": {"enum": ["any", "mean"]},
        "runs": {"type": "integer", "minimum": 1},
        "dataset": {"type": "string"},
        "budget": {"type": "integer", "minimum": 1},
        "space": {
            "type": "object",
            "properties": {
                "lam": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                "ell": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                "delta": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                "sigma": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


class CliError(Exception):
    def __init__(self, stage: str, message: str, *, path=None, line=None, code: int = 1):
        super().__init__(message)
        self.stage, self.message, self.path, self.line, self.code = stage, message, path, line, code


# ---------------------------------------------------------------------------
# helpers


def _config(args) -> dict:
    cfg: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise CliError("config", "config file not found", path=str(path))
        try:
            cfg = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CliError("config", f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from None
        try:
            jsonschema.validate(cfg, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise CliError("config", f"{where}: {exc.message}", path=str(path)) from None
    if getattr(args, "profile", None):
        cfg["profile"] = args.profile
    cfg.setdefault("profile", "realistic")
    return cfg


def _detector_config(cfg: dict) -> DetectorConfig:
    keys = {k: cfg[k] for k in ("lam", "ell", "delta", "sigma", "quantifier") if k in cfg}
    return DetectorConfig.profile(cfg["profile"], **keys)


def _clustering(cfg: dict) -> ClusteringConfig:
    return ClusteringConfig(**cfg.get("clustering", {}))


def _window(cfg: dict) -> ObservationWindow:
    w = cfg.get("window")
    return ObservationWindow.from_clock(w.get("begin", "21:00"), w.get("end", "12:00")) if w else ObservationWindow()


def _need_input(args, stage: str) -> Path:
    if not args.input:
        raise CliError(stage, "--input is required")
    p = Path(args.input)
    if not p.exists():
        raise CliError(stage, "input not found", path=str(p))
    return p


def _need_output(args, stage: str) -> Path:
    if not args.output:
        raise CliError(stage, "--output is required")
    p = Path(args.output)
    if p.parent and not p.parent.exists():
        raise CliError(stage, "output directory does not exist", path=str(p.parent))
    return p


def _read_trajectory(path: Path):
    if path.suffix == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        return np.asarray(doc["rows"], dtype=float)
    return load_trajectory_csv(path).rows


def _check_truth_path(args, stage: str) -> None:
    path = getattr(args, "truth", None)
    if path and not Path(path).is_file():
        raise CliError(stage, "truth file not found", path=path)


def _read_truth(path: str | None, n: int):
    if not path:
        return None
    lab = load_labels(path)
    truth = lab.truth if lab.truth is not None else lab.predicted
    if truth.size != n:
        raise CliError("labels", f"truth has {truth.size} rows, trajectory has {n}", path=path)
    return truth


def _write_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    out = _need_output(args, "generate")
    if args.input:
        spec = load_spec(_need_input(args, "generate"))
    else:
        name = args.dataset or "ELP1-D"
        if name not in PRESETS:
            raise CliError("generate", f"unknown dataset {name!r}; choose from {sorted(PRESETS)}")
        spec = PRESETS[name]
    if args.days:
        from dataclasses import replace

        spec = replace(spec, days=args.days)
    seq, truth = generate(spec, seed=args.seed)
    save_events(seq, out)
    save_labels(DriftLabels(truth, truth), _sidecar(out, ".labels.csv"))
    _write_json({"seed": args.seed, "spec": spec_to_dict(spec), "stats": stats(seq, truth)},
                _sidecar(out, ".spec.json"))
    return 0


def cmd_featurize(args) -> int:
    src, out = _need_input(args, "featurize"), _need_output(args, "featurize")
    cfg = _config(args)
    seq = load_events(src)
    save_feature_rows(featurize(seq, _window(cfg)), out)
    return 0


def cmd_trajectory(args) -> int:
    src, out = _need_input(args, "trajectory"), _need_output(args, "trajectory")
    cfg = _config(args)
    traj = build_trajectory(load_feature_rows(src), _clustering(cfg))
    if out.suffix == ".json":
        save_trajectory_json(traj, out)
    else:
        save_trajectory_csv(traj, out)
    return 0


def cmd_detect(args) -> int:
    src, out = _need_input(args, "detect"), _need_output(args, "detect")
    _check_truth_path(args, "detect")
    cfg = _config(args)
    Q = _read_trajectory(src)
    dcfg = _detector_config(cfg)
    queue = int(cfg.get("queue_capacity", 0))
    result = run_with_recurrence(Q, dcfg, queue) if queue else run_detailed(Q, dcfg)
    log.info("detector scanned %d intervals in %.3fs (%s)", result.labels.n, result.elapsed, result.backend)
    labels = result.labels
    truth = _read_truth(args.truth, labels.n)
    if truth is not None:
        labels = labels.with_truth(truth)
    save_labels(labels, out)
    extra = {"seed": args.seed, "version": __version__}
    if truth is not None:
        extra["metrics"] = score(labels, truth).to_dict()
    dump_report(run_report(dcfg, result, extra), _sidecar(out, ".report.json"))
    return 0


def cmd_baseline(args) -> int:
    src, out = _need_input(args, "baseline"), _need_output(args, "baseline")
    _check_truth_path(args, "baseline")
    cfg = _config(args)
    Q = _read_trajectory(src)
    method = args.method or cfg.get("baseline", "ikssw")
    dcfg = _detector_config(cfg)
    ell = cfg.get("baseline_ell", dcfg.ell)
    delta = cfg.get("baseline_delta", dcfg.delta)
    if method == "kis":
        labels = kis(Q.shape[0], args.seed)
    elif method == "ikssw":
        labels = ikssw(Q, ell, delta, combine=cfg.get("baseline_combine", "any"))
    else:
        labels = iks_bdd(Q, ell, delta, combine=cfg.get("baseline_combine", "any"))
    truth = _read_truth(args.truth, labels.n)
    save_labels(labels.with_truth(truth) if truth is not None else labels, out)
    return 0


def cmd_evaluate(args) -> int:
    src, out = _need_input(args, "evaluate"), _need_output(args, "evaluate")
    _check_truth_path(args, "evaluate")
    labels = load_labels(src)
    if args.truth:
        labels = labels.with_truth(_read_truth(args.truth, labels.n))
    if labels.truth is None:
        raise CliError("evaluate", "no ground truth: pass --truth or a label file with a truth column", path=str(src))
    _write_json(score(labels, labels.truth).to_dict(), out)
    return 0


def _bundle(cfg: dict, args):
    from .pipeline import make_bundle

    name = args.dataset or cfg.get("dataset", "ELP1-D")
    if name not in PRESETS:
        raise CliError("tune", f"unknown dataset {name!r}; choose from {sorted(PRESETS)}")
    runs = args.runs or cfg.get("runs", 3)
    base = 0 if args.seed is None else args.seed
    return name, make_bundle(name, range(base, base + runs), _clustering(cfg))


def cmd_tune(args) -> int:
    out = _need_output(args, "tune")
    cfg = _config(args)
    name, bundle = _bundle(cfg, args)
    base = SPACES[cfg["profile"]]
    space_kw = {k: tuple(v) for k, v in cfg.get("space", {}).items()}
    space = SearchSpace(
        lam=space_kw.get("lam", base.lam),
        ell=space_kw.get("ell", base.ell),
        delta=space_kw.get("delta", base.delta),
        sigma=space_kw.get("sigma", base.sigma),
        budget=args.budget or cfg.get("budget", base.budget),
        seed=args.seed,
    )
    defaults = {**PROFILES[cfg["profile"]], **{k: cfg[k] for k in ("lam", "ell", "delta", "sigma") if k in cfg}}
    result = tune(bundle, space, defaults=defaults, jobs=args.jobs)
    save_trials(result.trials, out)
    _write_json(
        {"dataset": name, "best_trial": result.best.index, "best": result.best.params,
         "mean_f1": result.best.mean_f1, "defaults_f1": result.trials[0].mean_f1},
        _sidecar(out, ".best.json"),
    )
    return 0


def cmd_export_plotdata(args) -> int:
    src, out = _need_input(args, "export-plotdata"), _need_output(args, "export-plotdata")
    cfg = _config(args)
    rows = load_feature_rows(src)
    traj = build_trajectory(rows, _clustering(cfg))
    raw = np.array([r.features if not r.is_empty else [np.nan] * traj.m for r in rows], dtype=float)
    lo, hi = traj.scale_lo, traj.scale_hi
    span = np.where(hi > lo, hi - lo, 1.0)
    norm = (raw - lo) / span
    names = list(FEATURE_NAMES) if traj.m == len(FEATURE_NAMES) else [f"z{h + 1}" for h in range(traj.m)]
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["interval", *[f"q{h + 1}" for h in range(traj.m)], *[f"{c}_norm" for c in names]])
        for j in range(traj.n):
            w.writerow([j, *(repr(float(v)) for v in traj.rows[j]),
                        *("" if np.isnan(v) else repr(float(v)) for v in norm[j])])
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "featurize": cmd_featurize,
    "trajectory": cmd_trajectory,
    "detect": cmd_detect,
    "baseline": cmd_baseline,
    "evaluate": cmd_evaluate,
    "tune": cmd_tune,
    "export-plotdata": cmd_export_plotdata,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="input file")
    common.add_argument("--output", "-o", help="output file")
    common.add_argument("--config", "-c", help="JSON configuration file")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers for tune")
    common.add_argument("--profile", choices=sorted(PROFILES), help="default hyperparameter profile")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(prog="dynamo-drift", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="synthesise an event CSV with ground truth")
    p.add_argument("--dataset", help=f"preset name: {', '.join(PRESETS)}")
    p.add_argument("--days", type=int, help="override the number of days")

    sub.add_parser("featurize", parents=[common], help="event CSV to daily feature CSV")
    sub.add_parser("trajectory", parents=[common], help="feature CSV to trajectory CSV/JSON")

    p = sub.add_parser("detect", parents=[common], help="label drift intervals of a trajectory")
    p.add_argument("--truth", help="label CSV whose truth column is attached to the output")

    p = sub.add_parser("baseline", parents=[common], help="run a comparison detector")
    p.add_argument("--method", choices=["kis", "ikssw", "iks-bdd"])
    p.add_argument("--truth", help="label CSV with ground truth")

    p = sub.add_parser("evaluate", parents=[common], help="score a label CSV")
    p.add_argument("--truth", help="label CSV with ground truth")

    p = sub.add_parser("tune", parents=[common], help="random search over detector hyperparameters")
    p.add_argument("--dataset", help="preset to generate the tuning bundle from")
    p.add_argument("--runs", type=int, help="datasets (seeds) in the bundle")
    p.add_argument("--budget", type=int, help="number of trials")

    sub.add_parser("export-plotdata", parents=[common], help="trajectory and normalised features as CSV")
    return parser


def _report(stage, message, path=None, line=None) -> None:
    print(json.dumps({"stage": stage, "message": message, "path": path, "line": line}), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    stage = args.command
    t0 = time.perf_counter()
    try:
        code = COMMANDS[stage](args)
    except CliError as exc:
        _report(exc.stage, exc.message, exc.path, exc.line)
        return exc.code
    except ValidationError as exc:
        _report(stage, exc.message, exc.path, exc.line)
        return 1
    except (OSError, MemoryError) as exc:
        _report(stage, str(exc), getattr(exc, "filename", None))
        return 2
    except Exception as exc:  # noqa: BLE001 - surfaced as a structured runtime failure
        log.debug("unhandled error", exc_info=True)
        _report(stage, f"{type(exc).__name__}: {exc}")
        return 2
    log.info("%s finished in %.3fs", stage, time.perf_counter() - t0)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
