"""Command-line interface.

Subcommands cover the full pipeline: ``synth`` (generate fleets),
``ingest`` (validate and canonicalize trace files), ``featurize``,
``select``, ``train``, ``evaluate``, ``calibrate``, ``obfuscate`` and
``recipe`` (named end-to-end experiments).

Exit codes: 0 on success, 2 on validation/usage errors, 3 on
unexpected runtime failures.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from urllib.parse import quote

import numpy as np

from sensorprint import __version__
from sensorprint.calibrate import (
    ORIENTATIONS,
    STANDARD_GRAVITY,
    apply_calibration,
    estimate_accel_calibration,
    estimate_gyro_calibration,
    load_calibration,
    save_calibration,
)
from sensorprint.classify import make_classifier, save_model
from sensorprint.errors import ValidationError
from sensorprint.evaluate import evaluate_repeated
from sensorprint.features import (
    featurize_traces,
    read_feature_csv,
    write_feature_csv,
)
from sensorprint.obfuscate import ObfuscationPolicy, obfuscate_trace
from sensorprint.preprocess import DEFAULT_RESAMPLE_RATE_HZ, STREAMS
from sensorprint.selection import DEFAULT_N_BINS, jmi_rank
from sensorprint.synth import (
    FleetConfig,
    fleet_manifest,
    generate_accel_calibration_traces,
    generate_fleet,
    generate_gyro_calibration_traces,
    sample_fleet,
)
from sensorprint.traces import load_trace, save_trace

log = logging.getLogger("sensorprint")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _trace_files(inputs):
    """Expand files/directories into a sorted list of trace files."""
    files = []
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            # Skip manifests and any cal/ subtree: calibration traces are
            # consumed by `calibrate` (point it at the cal directory), not
            # mixed into classification sessions.
            found = [
                p for p in path.rglob("*")
                if p.suffix.lower() in (".json", ".csv")
                and not p.name.endswith(".meta.json")
                and p.name not in ("fleet.json", "protocol.json")
                and "cal" not in p.relative_to(path).parts[:-1]
            ]
            files.extend(found)
        elif path.exists():
            files.append(path)
        else:
            raise ValidationError(f"no such file or directory: {path}")
    files = sorted(set(files), key=str)
    if not files:
        raise ValidationError("no trace files found in the given inputs")
    return files


def _load_traces(inputs):
    traces = [load_trace(p) for p in _trace_files(inputs)]
    traces.sort(key=lambda t: (t.device_id, t.session_id))
    return traces


def _canonical_name(trace):
    device = quote(trace.device_id, safe="-._")
    session = quote(trace.session_id, safe="-._")
    return f"{device}-{session}.json"


def _write_traces(traces, out_dir, fmt="json"):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seen = {}
    for trace in traces:
        name = _canonical_name(trace)
        if fmt == "csv":
            name = name[: -len(".json")] + ".csv"
        if name in seen:
            raise ValidationError(
                f"duplicate device/session identity: {trace.device_id}/{trace.session_id}"
            )
        seen[name] = True
        save_trace(trace, out_dir / name)
    return len(seen)


def _write_json(obj, path):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _parse_streams(text):
    if text is None:
        return STREAMS
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    for name in names:
        if name not in STREAMS:
            raise ValidationError(f"unknown stream {name!r}, expected one of {STREAMS}")
    if not names:
        raise ValidationError("empty stream list")
    return names


def _classifier_from_args(args):
    if args.model == "bagged_trees":
        return make_classifier(
            "bagged_trees", n_trees=args.trees, max_depth=args.max_depth,
            min_leaf=args.min_leaf, random_state=args.seed,
        )
    if args.model == "knn":
        return make_classifier("knn", n_neighbors=args.neighbors)
    return make_classifier("gnb")


def _apply_selection(table, selection_path, k):
    with open(selection_path, encoding="utf-8") as fh:
        try:
            sel = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{selection_path}: invalid JSON: {exc.msg}") from exc
    ranking = sel.get("ranking")
    if not isinstance(ranking, list) or not ranking:
        raise ValidationError(f"{selection_path}: missing 'ranking' list")
    if k is not None:
        if not 1 <= k <= len(ranking):
            raise ValidationError(f"--k must be in [1, {len(ranking)}], got {k}")
        ranking = ranking[:k]
    return table.select(ranking)


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def _fleet_config_from_args(args):
    base = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            try:
                base = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{args.config}: invalid JSON: {exc.msg}") from exc
        if not isinstance(base, dict):
            raise ValidationError(f"{args.config}: fleet config must be a JSON object")
    overrides = {
        "n_devices": args.devices,
        "sessions_per_device": args.sessions,
        "duration_s": args.duration,
        "rate_hz": args.rate,
        "seed": args.seed,
        "placement": args.placement,
        "audio_mode": args.audio_mode,
        "timing_jitter_ms": args.jitter_ms,
    }
    for key, value in overrides.items():
        if value is not None:
            base[key] = value
    return FleetConfig.from_dict(base)


def cmd_synth(args):
    config = _fleet_config_from_args(args)
    profiles = sample_fleet(config)
    traces = generate_fleet(config, profiles)
    out_dir = Path(args.out)
    n = _write_traces(traces, out_dir, fmt=args.format)
    _write_json(fleet_manifest(config, profiles), out_dir / "fleet.json")
    log.info("wrote %d traces and fleet.json to %s", n, out_dir)

    if args.with_calibration:
        angle = args.cal_angle
        for d, profile in enumerate(profiles):
            cal_dir = out_dir / "cal" / quote(profile.device_id, safe="-._")
            cal_dir.mkdir(parents=True, exist_ok=True)
            accel = generate_accel_calibration_traces(profile, config, d)
            gyro = generate_gyro_calibration_traces(
                profile, config, d, angle=angle, angle_jitter=args.cal_angle_jitter,
            )
            for orient in ORIENTATIONS:
                save_trace(accel[orient], cal_dir / f"accel-{orient}.json")
                save_trace(gyro[orient], cal_dir / f"gyro-{orient}.json")
        _write_json({"angle": angle, "angle_jitter": args.cal_angle_jitter},
                    out_dir / "cal" / "protocol.json")
        log.info("wrote calibration sessions for %d devices", len(profiles))
    return EXIT_OK


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------

def cmd_ingest(args):
    files = _trace_files(args.inputs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    errors = 0
    seen = {}
    for path in files:
        try:
            trace = load_trace(path)
        except ValidationError as exc:
            log.error("%s", exc)
            errors += 1
            continue
        name = _canonical_name(trace)
        if name in seen:
            log.error("%s: duplicate device/session identity also found in %s",
                      path, seen[name])
            errors += 1
            continue
        seen[name] = path
        save_trace(trace, out_dir / name)
    log.info("ingested %d traces to %s (%d rejected)", len(seen), out_dir, errors)
    if errors:
        raise ValidationError(f"{errors} of {len(files)} input files failed validation")
    return EXIT_OK


# ---------------------------------------------------------------------------
# featurize / select / train / evaluate
# ---------------------------------------------------------------------------

def cmd_featurize(args):
    streams = _parse_streams(args.streams)
    traces = _load_traces(args.traces)
    table = featurize_traces(traces, streams=streams, rate_hz=args.rate)
    write_feature_csv(table, args.out)
    log.info("featurized %d traces x %d features to %s",
             table.X.shape[0], table.X.shape[1], args.out)
    return EXIT_OK


def cmd_select(args):
    table = read_feature_csv(args.features)
    y, _ = table.device_labels()
    ranking, scores = jmi_rank(table.X, y, n_features=args.k, n_bins=args.bins)
    _write_json(
        {
            "n_bins": args.bins,
            "ranking": [table.names[j] for j in ranking],
            "scores": scores,
        },
        args.out,
    )
    log.info("ranked %d features to %s", len(ranking), args.out)
    return EXIT_OK


def cmd_train(args):
    table = read_feature_csv(args.features)
    if args.streams:
        table = table.stream_subset(_parse_streams(args.streams))
    if args.select:
        table = _apply_selection(table, args.select, args.k)
    y = np.asarray([d for d, _ in table.ids])
    clf = _classifier_from_args(args)
    clf.fit(table.X, y)
    save_model(clf, args.out, feature_names=table.names)
    log.info("trained %s on %d traces (%d classes) -> %s",
             args.model, table.X.shape[0], np.unique(y).size, args.out)
    return EXIT_OK


def cmd_evaluate(args):
    table = read_feature_csv(args.features)
    if args.streams:
        table = table.stream_subset(_parse_streams(args.streams))
    if args.select:
        table = _apply_selection(table, args.select, args.k)
    y, devices = table.device_labels()
    clf = _classifier_from_args(args)
    report = evaluate_repeated(
        table.X, y, clf, n_reps=args.reps, seed=args.seed,
        train_fraction=args.train_fraction, train_count=args.train_count,
    )
    obj = report.to_dict()
    obj["devices"] = devices
    obj["model"] = args.model
    obj["streams"] = list(_parse_streams(args.streams))
    if args.out:
        _write_json(obj, args.out)
    print(f"AvgF {report.mean_avg_f:.4f} +/- {report.ci95_avg_f:.4f} "
          f"(AvgPr {report.mean_avg_precision:.4f}, AvgRe {report.mean_avg_recall:.4f}, "
          f"{args.reps} reps, {len(devices)} devices)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# calibrate / obfuscate
# ---------------------------------------------------------------------------

def _parse_orientation_traces(pairs):
    traces = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValidationError(
                f"--trace expects ORIENTATION=PATH (e.g. x+=run1.json), got {pair!r}"
            )
        orient, path = pair.split("=", 1)
        if orient not in ORIENTATIONS:
            raise ValidationError(
                f"unknown orientation {orient!r}, expected one of {ORIENTATIONS}"
            )
        if orient in traces:
            raise ValidationError(f"orientation {orient!r} given twice")
        traces[orient] = load_trace(path)
    return traces


def cmd_calibrate(args):
    traces = _parse_orientation_traces(args.trace)
    if args.sensor == "accel":
        model = estimate_accel_calibration(traces, g=args.g)
    else:
        if args.angle is None:
            raise ValidationError("gyro calibration requires --angle (radians)")
        model = estimate_gyro_calibration(traces, angle=args.angle)
    save_calibration(model, args.out)
    log.info("calibration model -> %s  O=%s S=%s", args.out,
             np.round(model.O, 6).tolist(), np.round(model.S, 6).tolist())
    if args.apply_to:
        out_dir = Path(args.apply_out or (str(args.apply_to[0]) + "-calibrated"))
        calibrated = [apply_calibration(t, model) for t in _load_traces(args.apply_to)]
        n = _write_traces(calibrated, out_dir)
        log.info("applied calibration to %d traces -> %s", n, out_dir)
    return EXIT_OK


def cmd_obfuscate(args):
    policy = ObfuscationPolicy(
        seed=args.seed, range_scale=args.range_scale, inject_prob=args.inject_prob,
    )
    traces = [obfuscate_trace(t, policy) for t in _load_traces(args.traces)]
    n = _write_traces(traces, args.out, fmt=args.format)
    log.info("obfuscated %d traces -> %s (scale %g, inject %g)",
             n, args.out, args.range_scale, args.inject_prob)
    return EXIT_OK


# ---------------------------------------------------------------------------
# recipe
# ---------------------------------------------------------------------------

def _recipe_eval(table, streams, *, reps, seed, trees, train_count=None):
    sub = table.stream_subset(streams)
    y, _ = sub.device_labels()
    clf = make_classifier("bagged_trees", n_trees=trees)
    report = evaluate_repeated(sub.X, y, clf, n_reps=reps, seed=seed,
                               train_count=train_count)
    return {
        "streams": list(streams),
        "mean_avg_f": report.mean_avg_f,
        "ci95_avg_f": report.ci95_avg_f,
        "mean_avg_precision": report.mean_avg_precision,
        "mean_avg_recall": report.mean_avg_recall,
    }


def _featurized_fleet(config):
    traces = generate_fleet(config)
    return featurize_traces(traces), traces


def run_recipe(name, out_dir, *, seed=0, devices=30, sessions=10, reps=10, trees=100):
    """Run a named end-to-end experiment; returns the report dict.

    Reports are deterministic for a given seed: rerunning a recipe
    reproduces the output files byte for byte.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = FleetConfig(n_devices=devices, sessions_per_device=sessions, seed=seed)
    report = {"recipe": name, "seed": seed, "devices": devices,
              "sessions": sessions, "reps": reps, "trees": trees}

    if name == "baseline":
        table, _ = _featurized_fleet(base)
        write_feature_csv(table, out_dir / "features.csv")
        report["results"] = [
            _recipe_eval(table, streams, reps=reps, seed=seed, trees=trees)
            for streams in (STREAMS, ("accel_magnitude",),
                            ("gyro_x", "gyro_y", "gyro_z"))
        ]
    elif name == "vary-devices":
        sizes = [s for s in (10, 20, 30, 40, 50, 60) if s <= devices] or [devices]
        big = FleetConfig(n_devices=max(sizes), sessions_per_device=sessions, seed=seed)
        table, _ = _featurized_fleet(big)
        results = []
        for size in sizes:
            keep = {f"dev{i:03d}" for i in range(size)}
            rows = [i for i, (d, _) in enumerate(table.ids) if d in keep]
            sub = type(table)(ids=[table.ids[i] for i in rows],
                              names=table.names, X=table.X[rows])
            entry = _recipe_eval(sub, STREAMS, reps=reps, seed=seed, trees=trees)
            entry["n_devices"] = size
            results.append(entry)
        report["results"] = results
    elif name == "vary-train":
        table, _ = _featurized_fleet(base)
        results = []
        for count in (1, 2, 3, 4, 5):
            if count >= sessions:
                continue
            entry = _recipe_eval(table, STREAMS, reps=reps, seed=seed,
                                 trees=trees, train_count=count)
            entry["train_count"] = count
            results.append(entry)
        report["results"] = results
    elif name == "calibrated":
        floor = FleetConfig(
            n_devices=devices, sessions_per_device=sessions, seed=seed,
            accel_sigma_range=(0.02, 0.02), gyro_sigma_range=(0.002, 0.002),
            noise_color_range=(0.3, 0.3),
        )
        profiles = sample_fleet(floor)
        traces = generate_fleet(floor, profiles)
        models = {}
        for d, profile in enumerate(profiles):
            accel_cal = estimate_accel_calibration(
                generate_accel_calibration_traces(profile, floor, d))
            gyro_cal = estimate_gyro_calibration(
                generate_gyro_calibration_traces(profile, floor, d,
                                                 angle_jitter=0.02),
                angle=math.pi)
            models[profile.device_id] = (accel_cal, gyro_cal)
        calibrated = []
        for trace in traces:
            accel_cal, gyro_cal = models[trace.device_id]
            calibrated.append(apply_calibration(apply_calibration(trace, accel_cal),
                                                gyro_cal))
        results = []
        for label, corpus in (("uncalibrated", traces), ("calibrated", calibrated)):
            table = featurize_traces(corpus)
            for streams in (("accel_magnitude",), ("gyro_x", "gyro_y", "gyro_z")):
                entry = _recipe_eval(table, streams, reps=reps, seed=seed, trees=trees)
                entry["condition"] = label
                results.append(entry)
        report["results"] = results
    elif name == "obf-range":
        _, traces = _featurized_fleet(base)
        results = []
        for scale in (1.0, 10.0, 20.0, 50.0):
            policy = ObfuscationPolicy(seed=seed, range_scale=scale)
            table = featurize_traces([obfuscate_trace(t, policy) for t in traces])
            entry = _recipe_eval(table, STREAMS, reps=reps, seed=seed, trees=trees)
            entry["range_scale"] = scale
            results.append(entry)
        report["results"] = results
    elif name == "obf-inject":
        _, traces = _featurized_fleet(base)
        results = []
        for prob in (0.0, 0.2, 0.4):
            policy = ObfuscationPolicy(seed=seed, range_scale=10.0, inject_prob=prob)
            table = featurize_traces([obfuscate_trace(t, policy) for t in traces])
            entry = _recipe_eval(table, STREAMS, reps=reps, seed=seed, trees=trees)
            entry["inject_prob"] = prob
            results.append(entry)
        report["results"] = results
    else:
        raise ValidationError(f"unknown recipe {name!r}, see --help for choices")

    _write_json({"recipe": name, "seed": seed, "version": __version__,
                 "config": base.to_dict()}, out_dir / "manifest.json")
    _write_json(report, out_dir / "report.json")
    return report


RECIPES = ("baseline", "vary-devices", "vary-train", "calibrated",
           "obf-range", "obf-inject")


def cmd_recipe(args):
    report = run_recipe(args.name, args.out, seed=args.seed, devices=args.devices,
                        sessions=args.sessions, reps=args.reps, trees=args.trees)
    for entry in report["results"]:
        extras = {k: v for k, v in entry.items()
                  if k not in ("streams", "mean_avg_f", "ci95_avg_f",
                               "mean_avg_precision", "mean_avg_recall")}
        tag = " ".join(f"{k}={v}" for k, v in sorted(extras.items()))
        sensors = sorted({s.split("_")[0] for s in entry["streams"]})
        print(f"{'+'.join(sensors):>12} {tag:<24} "
              f"AvgF {entry['mean_avg_f']:.4f} +/- {entry['ci95_avg_f']:.4f}")
    log.info("recipe %s -> %s", args.name, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _max_depth(text):
    if text.lower() in ("none", "unbounded"):
        return None
    return int(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sensorprint",
        description="Device fingerprinting from motion-sensor streams.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic device fleet")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--devices", type=int, default=None)
    p.add_argument("--sessions", type=int, default=None)
    p.add_argument("--duration", type=float, default=None, help="seconds per session")
    p.add_argument("--rate", type=float, default=None, help="nominal sample rate (Hz)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--placement", choices=("desk", "hand"), default=None)
    p.add_argument("--audio-mode", choices=("none", "sine20k", "song"), default=None)
    p.add_argument("--jitter-ms", type=float, default=None)
    p.add_argument("--config", help="fleet config JSON (overridden by explicit flags)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--with-calibration", action="store_true",
                   help="also write per-device calibration sessions")
    p.add_argument("--cal-angle", type=float, default=math.pi,
                   help="nominal rotation angle for gyro calibration (rad)")
    p.add_argument("--cal-angle-jitter", type=float, default=0.0,
                   help="relative std of the executed rotation angle")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate and canonicalize trace files")
    p.add_argument("inputs", nargs="+", help="trace files or directories")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("featurize", help="extract feature vectors to CSV")
    p.add_argument("--traces", nargs="+", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--streams", help="comma-separated stream subset")
    p.add_argument("--rate", type=float, default=DEFAULT_RESAMPLE_RATE_HZ)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("select", help="rank features by joint mutual information")
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--out", required=True, help="output selection JSON")
    p.add_argument("--k", type=int, default=None, help="features to rank (default all)")
    p.add_argument("--bins", type=int, default=DEFAULT_N_BINS)
    p.set_defaults(func=cmd_select)

    def add_model_args(p, with_seed=True):
        p.add_argument("--model", choices=("bagged_trees", "knn", "gnb"),
                       default="bagged_trees")
        p.add_argument("--trees", type=int, default=100)
        p.add_argument("--max-depth", type=_max_depth, default=None)
        p.add_argument("--min-leaf", type=int, default=1)
        p.add_argument("--neighbors", type=int, default=1)
        p.add_argument("--streams", help="comma-separated stream subset")
        p.add_argument("--select", help="selection JSON to subset features")
        p.add_argument("--k", type=int, default=None,
                       help="top-k features from --select")
        if with_seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="fit a classifier on a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="output model JSON")
    add_model_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="repeated-split identification evaluation")
    p.add_argument("--features", required=True)
    p.add_argument("--out", help="output report JSON")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--train-count", type=int, default=None,
                   help="sessions per device in training (overrides fraction)")
    add_model_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", help="estimate a sensor calibration model")
    p.add_argument("--sensor", choices=("accel", "gyro"), required=True)
    p.add_argument("--trace", action="append", required=True,
                   metavar="ORIENT=PATH",
                   help="orientation trace, e.g. x+=up.json (six required)")
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--g", type=float, default=STANDARD_GRAVITY)
    p.add_argument("--angle", type=float, default=None,
                   help="nominal rotation angle in radians (gyro)")
    p.add_argument("--apply-to", nargs="+", help="traces to correct with the model")
    p.add_argument("--apply-out", help="output directory for corrected traces")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("obfuscate", help="apply obfuscation to traces")
    p.add_argument("--traces", nargs="+", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--range-scale", type=float, default=1.0)
    p.add_argument("--inject-prob", type=float, default=0.0)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_obfuscate)

    p = sub.add_parser("recipe", help="run a named end-to-end experiment")
    p.add_argument("name", choices=RECIPES)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--devices", type=int, default=30)
    p.add_argument("--sessions", type=int, default=10)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--trees", type=int, default=100)
    p.set_defaults(func=cmd_recipe)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - defensive
        log.error("unexpected failure: %s", exc, exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
