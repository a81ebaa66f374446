"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import BenchmarkConfig, BenchmarkLog, run_benchmark
from .data import filter_classes, ingest, parse_window_mode, write_csv
from .datagen import DriftScenario, generate_stream, write_scenario
from .detector import DriftTestConfig, FeatureWeights, detect, detect_per_class, load_weights
from .errors import BenchmarkError, DataError
from .model import ForestParams
from .report import classes_exceeding, write_bundle

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _echo_config(command: str, config: dict) -> None:
    print(json.dumps({"command": command, "config": config}, sort_keys=True), file=sys.stderr)


def _add_drift_args(p, test_default="wasserstein"):
    p.add_argument("--test", choices=["ks", "wasserstein"], default=test_default,
                   help="per-feature test (default: %(default)s; normalized Wasserstein for global "
                        "windows with many samples, KS for small class-level windows)")
    p.add_argument("--alpha", type=float, default=0.05,
                   help="KS significance level per feature (default: %(default)s, i.e. 5%%)")
    p.add_argument("--tau", type=float, default=0.05,
                   help="normalized-Wasserstein threshold per feature (default: %(default)s)")
    p.add_argument("--severity-threshold", type=float, default=0.05,
                   help="drift is declared when the weighted severity reaches this value "
                        "(default: %(default)s; 0.5 is a common stricter choice)")
    p.add_argument("--severity-mode", choices=["binary", "statistic"], default="binary",
                   help="per-feature severity: test rejection (1/0) or the capped statistic (default: %(default)s)")


def _drift_config(args) -> DriftTestConfig:
    return DriftTestConfig(
        test_kind=args.test,
        alpha=args.alpha,
        tau=args.tau,
        severity_threshold=args.severity_threshold,
        severity_mode=args.severity_mode,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="driftbench", description="Drift-based dataset stability benchmark.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("generate", help="write a synthetic labeled stream with drift")
    g.add_argument("--out", required=True, help="output CSV path; the scenario JSON is written next to it")
    g.add_argument("--pattern", choices=["none", "sudden", "gradual", "incremental", "recurring"], default="sudden")
    g.add_argument("--n-windows", type=int, default=60, help="one window per synthetic day (default: %(default)s)")
    g.add_argument("--samples-per-window", type=int, default=2000)
    g.add_argument("--n-features", type=int, default=20)
    g.add_argument("--n-classes", type=int, default=5)
    g.add_argument("--informative", type=int, default=None, help="informative features (default: half)")
    g.add_argument("--drift-at", type=int, default=20, help="first drifted window (default: %(default)s)")
    g.add_argument("--transition-len", type=int, default=5, help="gradual/incremental ramp length in windows")
    g.add_argument("--period", type=int, default=5, help="recurring block length in windows")
    g.add_argument("--magnitude", type=float, default=5.0, help="mean shift in standard deviations")
    g.add_argument("--drift-classes", type=int, default=None, help="only the first N classes drift (default: all)")
    g.add_argument("--drift-target", choices=["informative", "noise"], default="informative",
                   help="shift informative features, or only the last noise feature")
    g.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("benchmark", help="run the reference and retraining tracks over a dataset")
    b.add_argument("--data", required=True, help="input CSV")
    b.add_argument("--out", required=True, help="output log JSON")
    b.add_argument("--label-col", default="label")
    b.add_argument("--time-col", default=None, help="timestamp column (ISO-8601 or epoch seconds)")
    b.add_argument("--train-windows", type=int, default=7,
                   help="leading windows used for training (default: %(default)s, one week of daily windows)")
    b.add_argument("--window-by", action="append", default=None,
                   help="time:<n><s|m|h|d|w> or count:<n> (default: time:1d)")
    _add_drift_args(b)
    b.add_argument("--weighting", choices=["weighted", "unweighted"], default="weighted",
                   help="weight features by model importance or uniformly (default: %(default)s)")
    b.add_argument("--trees", type=int, default=50)
    b.add_argument("--max-depth", type=int, default=12)
    b.add_argument("--min-leaf", type=int, default=2)
    b.add_argument("--no-per-class", action="store_true", help="skip per-class drift reports")
    b.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("report", help="write summaries and charts for a benchmark log")
    r.add_argument("--log", required=True)
    r.add_argument("--out-dir", required=True)
    r.add_argument("--top-k", type=int, default=5, help="classes/features to chart (default: %(default)s)")
    r.add_argument("--workflow", choices=["ref", "retrain"], default="retrain",
                   help="track used for class/feature rankings (default: %(default)s)")

    d = sub.add_parser("detect", help="compare two CSV windows once")
    d.add_argument("--ref", required=True, help="reference window CSV")
    d.add_argument("--cur", required=True, help="current window CSV")
    d.add_argument("--weights", default=None, help="JSON object feature -> weight (default: uniform)")
    d.add_argument("--label-col", default=None, help="label column to exclude from features")
    d.add_argument("--time-col", default=None)
    d.add_argument("--per-class", action="store_true", help="also report per class (KS; needs --label-col)")
    d.add_argument("--out", default=None, help="write the report here instead of stdout")
    _add_drift_args(d)

    s = sub.add_parser("split", help="split a dataset into frequently drifting and stable classes")
    s.add_argument("--log", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out-prefix", required=True, help="writes <prefix>_drifted.csv and <prefix>_stable.csv")
    s.add_argument("--min-drifts", type=int, default=9,
                   help="classes with more than this many drifts are split off (default: %(default)s)")
    s.add_argument("--label-col", default="label")
    s.add_argument("--time-col", default=None)
    s.add_argument("--workflow", choices=["ref", "retrain"], default="retrain")
    return parser


def cmd_generate(args) -> int:
    scenario = DriftScenario(
        pattern=args.pattern,
        n_windows=args.n_windows,
        samples_per_window=args.samples_per_window,
        n_features=args.n_features,
        n_classes=args.n_classes,
        informative_features=args.informative,
        drift_at=args.drift_at,
        transition_len=args.transition_len,
        period=args.period,
        magnitude=args.magnitude,
        seed=args.seed,
        drift_classes=args.drift_classes,
        drift_target=args.drift_target,
    )
    _echo_config("generate", scenario.to_dict())
    data = generate_stream(scenario)
    write_csv(data, args.out)
    spath = write_scenario(scenario, args.out)
    print(f"wrote {len(data)} samples to {args.out} (scenario: {spath})")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    modes = args.window_by or ["time:1d"]
    if len(set(modes)) > 1:
        raise UsageError(f"conflicting --window-by values: {', '.join(modes)}")
    mode = parse_window_mode(modes[0])
    if mode.kind == "time" and args.time_col is None:
        raise UsageError("time windows need --time-col (or use --window-by count:N)")
    cfg = BenchmarkConfig(
        train_windows=args.train_windows,
        window_mode=mode,
        drift=_drift_config(args),
        weighting=args.weighting,
        model=ForestParams(args.trees, args.max_depth, args.min_leaf, args.seed),
        rng_seed=args.seed,
        per_class=not args.no_per_class,
    )
    _echo_config("benchmark", {"data": args.data, **cfg.to_dict()})
    data = ingest(args.data, args.label_col, args.time_col)
    log = run_benchmark(data, cfg)
    log.save(args.out)
    n_det = sum(r["retrained"] for r in log.rows)
    print(f"evaluated {len(log.rows)} windows, {n_det} retraining detections; log: {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    if args.top_k < 1:
        raise UsageError("--top-k must be >= 1")
    _echo_config("report", {"log": args.log, "out_dir": args.out_dir, "top_k": args.top_k, "workflow": args.workflow})
    log = BenchmarkLog.load(args.log)
    for path in write_bundle(log, args.out_dir, args.top_k, args.workflow):
        print(path)
    return EXIT_OK


def cmd_detect(args) -> int:
    if args.per_class and args.label_col is None:
        raise UsageError("--per-class needs --label-col")
    cfg = _drift_config(args)
    _echo_config("detect", {"ref": args.ref, "cur": args.cur, "weights": args.weights, **cfg.to_dict()})
    ref = ingest(args.ref, args.label_col, args.time_col)
    cur = ingest(args.cur, args.label_col, args.time_col)
    weights = load_weights(args.weights) if args.weights else FeatureWeights.uniform(ref.schema)
    report = detect(ref, cur, weights, cfg).to_dict()
    if args.per_class:
        report["per_class"] = {c: r.to_dict() for c, r in detect_per_class(ref, cur, weights, cfg).items()}
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_split(args) -> int:
    _echo_config("split", {"log": args.log, "data": args.data, "min_drifts": args.min_drifts,
                           "out_prefix": args.out_prefix, "workflow": args.workflow})
    log = BenchmarkLog.load(args.log)
    drifted = classes_exceeding(log, args.min_drifts, args.workflow)
    data = ingest(args.data, args.label_col, args.time_col)
    if drifted and set(drifted) & set(data.classes):
        hot = filter_classes(data, drifted, keep=True)
        stable = filter_classes(data, drifted, keep=False)
    else:
        hot, stable = data.take(slice(0, 0)), data
    write_csv(hot, f"{args.out_prefix}_drifted.csv")
    write_csv(stable, f"{args.out_prefix}_stable.csv")
    print(f"drifted classes ({len(drifted)}): {', '.join(drifted) or '-'}")
    print(f"{len(hot)} samples -> {args.out_prefix}_drifted.csv, {len(stable)} samples -> {args.out_prefix}_stable.csv")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "benchmark": cmd_benchmark,
    "report": cmd_report,
    "detect": cmd_detect,
    "split": cmd_split,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"driftbench {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, BenchmarkError, OSError) as exc:
        print(f"driftbench {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # invalid parameter values caught by config validation
        print(f"driftbench {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
