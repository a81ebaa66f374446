"""Global, per-class and per-feature views of a benchmark log.

Every number here is recomputed from the log rows; nothing else is
consulted. ``workflow`` selects the track: ``"ref"`` (frozen model,
compared with the training window) or ``"retrain"``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Union

from .bench import BenchmarkLog
from .errors import DataError

WORKFLOWS = ("ref", "retrain")


@dataclass(frozen=True)
class GlobalSummary:
    workflow: str
    drift_detection_count: int
    drift_strength_mean: float
    share_drifted_features_mean: float
    f1_mean: float
    evaluated_windows: int


@dataclass(frozen=True)
class ClassSeries:
    name: str
    window_ids: list
    drift_strengths: list
    f1: list
    drift_count: int
    mean_strength: float
    f1_drift_correlation: Optional[float]


@dataclass(frozen=True)
class FeatureSeries:
    name: str
    window_ids: list
    strengths: list
    drift_count: int
    mean_severity: float


def _check_workflow(workflow: str) -> None:
    if workflow not in WORKFLOWS:
        raise ValueError(f"workflow must be one of {WORKFLOWS}, got {workflow!r}")


def _mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values) if values else 0.0


def _detected(row: dict, workflow: str) -> bool:
    if workflow == "retrain":
        return bool(row["retrained"])
    return bool(row["report_ref"]["drifted"])


def summarize(log: BenchmarkLog) -> dict:
    """Detection count and mean strength, drifted share and macro F1 per track."""
    rows = log.rows
    if not rows:
        raise DataError("log has no evaluated windows")
    out = {}
    for wf in WORKFLOWS:
        reports = [r[f"report_{wf}"] for r in rows]
        out[wf] = GlobalSummary(
            workflow=wf,
            drift_detection_count=sum(_detected(r, wf) for r in rows),
            drift_strength_mean=_mean(rep["overall_severity"] for rep in reports),
            share_drifted_features_mean=_mean(rep["share_drifted"] for rep in reports),
            f1_mean=_mean(r[f"f1_{wf}"]["macro_f1"] for r in rows),
            evaluated_windows=len(rows),
        )
    return out


def pearson(xs, ys) -> Optional[float]:
    """Pearson correlation of paired values; None when either side is constant."""
    n = len(xs)
    if n != len(ys) or n < 2:
        return None
    mx, my = math.fsum(xs) / n, math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return None
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))


def _log_classes(log: BenchmarkLog, workflow: str) -> list:
    key = f"per_class_{workflow}"
    names = set()
    for row in log.rows:
        names.update(row.get(key, {}))
    return sorted(names)


def class_series(log: BenchmarkLog, name: str, workflow: str = "retrain") -> ClassSeries:
    """Per-window drift strength and F1 of one class; untested windows hold None."""
    _check_workflow(workflow)
    key = f"per_class_{workflow}"
    strengths, f1, ids = [], [], []
    count = 0
    for row in log.rows:
        ids.append(row["window_id"])
        rep = row.get(key, {}).get(name)
        if rep is None or rep.get("absent"):
            strengths.append(None)
        else:
            strengths.append(rep["overall_severity"])
            count += bool(rep["drifted"])
        f1.append(row[f"f1_{workflow}"]["per_class"].get(name))
    pairs = [(s, f) for s, f in zip(strengths, f1) if s is not None and f is not None]
    corr = pearson([p[0] for p in pairs], [p[1] for p in pairs]) if len(pairs) >= 3 else None
    return ClassSeries(
        name=name,
        window_ids=ids,
        drift_strengths=strengths,
        f1=f1,
        drift_count=count,
        mean_strength=_mean(s for s in strengths if s is not None),
        f1_drift_correlation=corr,
    )


def all_class_series(log: BenchmarkLog, workflow: str = "retrain") -> list:
    return [class_series(log, c, workflow) for c in _log_classes(log, workflow)]


def top_drifted_classes(log: BenchmarkLog, k: int = 5, workflow: str = "retrain") -> list:
    """Classes ordered by drift count, then mean strength (both descending), then name."""
    series = all_class_series(log, workflow)
    if not series:
        raise DataError("log carries no per-class reports")
    series.sort(key=lambda s: (-s.drift_count, -s.mean_strength, s.name))
    return series[:k]


def _schema(log: BenchmarkLog) -> list:
    return list(log.header["schema"])


def feature_series(log: BenchmarkLog, name: str, workflow: str = "retrain") -> FeatureSeries:
    _check_workflow(workflow)
    if name not in log.header["schema"]:
        raise DataError(f"unknown feature {name!r}")
    strengths, ids = [], []
    count = 0
    for row in log.rows:
        ids.append(row["window_id"])
        entry = next(e for e in row[f"report_{workflow}"]["per_feature"] if e["feature"] == name)
        strengths.append(entry["severity"])
        count += bool(entry["drifted"])
    return FeatureSeries(name, ids, strengths, count, _mean(strengths))


def top_drifted_features(log: BenchmarkLog, k: int = 5, workflow: str = "retrain") -> list:
    """Features ordered by drift count, then mean severity (both descending), then name."""
    if not log.rows:
        raise DataError("log has no evaluated windows")
    series = [feature_series(log, f, workflow) for f in _schema(log)]
    series.sort(key=lambda s: (-s.drift_count, -s.mean_severity, s.name))
    return series[:k]


def correlated_classes(log: BenchmarkLog, k: Optional[int] = 5, workflow: str = "retrain") -> list:
    """``(class, r)`` pairs, most negative correlation of strength with F1 first.

    Classes with fewer than three paired windows or a constant series are skipped.
    """
    scored = [(s.name, s.f1_drift_correlation) for s in all_class_series(log, workflow)]
    scored = [p for p in scored if p[1] is not None]
    if not scored:
        raise DataError("no class has enough varying paired points for a correlation")
    scored.sort(key=lambda p: (p[1], p[0]))
    return scored if k is None else scored[:k]


def classes_exceeding(log: BenchmarkLog, min_drifts: int, workflow: str = "retrain") -> list:
    """Names of classes with strictly more than ``min_drifts`` drift detections."""
    if not log.rows:
        return []
    return sorted(s.name for s in all_class_series(log, workflow) if s.drift_count > min_drifts)


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name)


def write_bundle(log: BenchmarkLog, out_dir: Union[str, Path], top_k: int = 5, workflow: str = "retrain") -> list:
    """Write the JSON summaries and SVG charts; returns the written paths."""
    from .charts import render_svg

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def dump(fname, payload):
        path = out / fname
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        written.append(path)

    summaries = summarize(log)
    dump(
        "summary.json",
        {
            "config": log.header["config"],
            "methods": log.header.get("methods", {}),
            "evaluated_windows": len(log.rows),
            "gap_windows": [g["window_id"] for g in log.gaps],
            "reference": asdict(summaries["ref"]),
            "retraining": asdict(summaries["retrain"]),
        },
    )

    top_classes = []
    if _log_classes(log, workflow):
        top_classes = top_drifted_classes(log, top_k, workflow)
        try:
            corr = correlated_classes(log, None, workflow)
        except DataError:
            corr = []
        dump(
            "per_class.json",
            {
                "workflow": workflow,
                "drift_counts": {s.name: s.drift_count for s in all_class_series(log, workflow)},
                "top_drifted": [asdict(s) for s in top_classes],
                "correlated": [{"class": c, "f1_drift_correlation": r} for c, r in corr],
            },
        )
    top_features = top_drifted_features(log, top_k, workflow)
    dump("per_feature.json", {"workflow": workflow, "top_drifted": [asdict(s) for s in top_features]})

    charts = [("global.svg", "global")]
    charts += [(f"class_{_safe_name(s.name)}.svg", f"class:{s.name}") for s in top_classes]
    charts += [(f"feature_{_safe_name(s.name)}.svg", f"feature:{s.name}") for s in top_features]
    for fname, which in charts:
        path = out / fname
        path.write_text(render_svg(log, which), encoding="utf-8")
        written.append(path)
    return written
