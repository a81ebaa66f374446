"""Feature-importance-weighted drift detection.

Each feature is tested on its own; the per-feature severities are
combined into one drift severity as an importance-weighted sum, and a
drift is declared when that sum reaches the configured threshold.
Features the classifier ignores therefore cannot raise an alarm.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import DataError, SchemaError
from .stats import TestOutcome, ks_two_sample, normalized_wasserstein

TEST_KINDS = ("ks", "wasserstein")
SEVERITY_MODES = ("binary", "statistic")

# Classes with fewer samples than this in either window are not tested.
MIN_CLASS_SAMPLES = 5

_WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class FeatureWeights:
    """Normalized per-feature weights, in schema order."""

    entries: Mapping[str, float]
    uniform_fallback: bool = False

    def __post_init__(self):
        if not self.entries:
            raise ValueError("weights are empty")
        if any(w < 0 for w in self.entries.values()):
            raise ValueError("weights must be non-negative")
        total = math.fsum(self.entries.values())
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {total}, expected 1")

    def __getitem__(self, feature: str) -> float:
        return self.entries[feature]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.entries.values())) == 1

    def to_dict(self) -> dict:
        return dict(self.entries)

    @classmethod
    def uniform(cls, features: Sequence[str]) -> "FeatureWeights":
        if not features:
            raise ValueError("no features")
        return cls({f: 1.0 / len(features) for f in features})


def normalize_weights(raw: Mapping[str, float]) -> FeatureWeights:
    """Scale raw importances to sum to one.

    All-zero input falls back to uniform weights with ``uniform_fallback`` set.
    """
    if not raw:
        raise ValueError("empty weight map")
    for name, value in raw.items():
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"invalid raw weight for {name!r}: {value}")
    total = math.fsum(raw.values())
    if total == 0.0:
        n = len(raw)
        return FeatureWeights({k: 1.0 / n for k in raw}, uniform_fallback=True)
    return FeatureWeights({k: v / total for k, v in raw.items()})


def load_weights(path: Union[str, Path]) -> FeatureWeights:
    """Read a flat JSON object ``{feature: weight}`` and normalize it."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise DataError(f"{path}: weights file must hold a JSON object")
    try:
        return normalize_weights({str(k): float(v) for k, v in raw.items()})
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def save_weights(weights: FeatureWeights, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(weights.to_dict(), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class DriftTestConfig:
    """Per-feature test selection and thresholds.

    ``alpha`` is used by the KS test, ``tau`` by the normalized
    Wasserstein distance; ``severity_threshold`` applies to the weighted sum.
    """

    test_kind: str = "wasserstein"
    alpha: float = 0.05
    tau: float = 0.05
    severity_threshold: float = 0.05
    severity_mode: str = "binary"

    def __post_init__(self):
        if self.test_kind not in TEST_KINDS:
            raise ValueError(f"test_kind must be one of {TEST_KINDS}, got {self.test_kind!r}")
        if self.severity_mode not in SEVERITY_MODES:
            raise ValueError(f"severity_mode must be one of {SEVERITY_MODES}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.tau > 0.0:
            raise ValueError("tau must be > 0")
        if not 0.0 < self.severity_threshold <= 1.0:
            raise ValueError("severity_threshold must lie in (0, 1]")

    def to_dict(self) -> dict:
        return {
            "test_kind": self.test_kind,
            "alpha": self.alpha,
            "tau": self.tau,
            "severity_threshold": self.severity_threshold,
            "severity_mode": self.severity_mode,
        }


@dataclass(frozen=True)
class FeatureDriftResult:
    feature: str
    outcome: TestOutcome
    severity: float
    weight: float

    def to_dict(self) -> dict:
        d = {"feature": self.feature}
        d.update(self.outcome.to_dict())
        d["severity"] = self.severity
        d["weight"] = self.weight
        return d


@dataclass(frozen=True)
class DriftReport:
    """Outcome of comparing one window against a reference window."""

    overall_severity: float
    drifted: bool
    share_drifted: float
    per_feature: tuple
    scope: str = "global"
    severity_threshold: float = 0.05

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "overall_severity": self.overall_severity,
            "drifted": self.drifted,
            "share_drifted": self.share_drifted,
            "per_feature": [r.to_dict() for r in self.per_feature],
        }

    def severities(self) -> dict:
        return {r.feature: r.severity for r in self.per_feature}


@dataclass(frozen=True)
class AbsentClass:
    """Marker for a class that could not be tested in a window pair."""

    ref_count: int
    cur_count: int

    def to_dict(self) -> dict:
        return {"absent": True, "ref_count": self.ref_count, "cur_count": self.cur_count}


def _severity(outcome: TestOutcome, mode: str) -> float:
    if mode == "binary":
        return 1.0 if outcome.drifted else 0.0
    return min(outcome.statistic, 1.0)


def feature_severity(ref_col, cur_col, cfg: DriftTestConfig, feature: str = "?", weight: float = 0.0) -> FeatureDriftResult:
    """Run the configured test on one feature column."""
    ref_col = np.asarray(ref_col, dtype=np.float64)
    cur_col = np.asarray(cur_col, dtype=np.float64)
    if ref_col.size == 0 or cur_col.size == 0:
        raise DataError(f"empty column for feature {feature!r}")
    if cfg.test_kind == "ks":
        outcome = ks_two_sample(ref_col, cur_col, alpha=cfg.alpha)
    else:
        outcome = normalized_wasserstein(ref_col, cur_col, tau=cfg.tau)
    return FeatureDriftResult(feature, outcome, _severity(outcome, cfg.severity_mode), weight)


def combine(results: Sequence[FeatureDriftResult], weights: FeatureWeights) -> float:
    """Weighted drift severity sum(w_i * s_i)."""
    if weights.is_uniform:
        # equal weights: dividing the plain sum keeps S identical to the drifted share
        return math.fsum(r.severity for r in results) / len(results)
    return math.fsum(weights[r.feature] * r.severity for r in results)


def check_schema(expected: Sequence[str], actual: Iterable[str], what: str) -> None:
    expected = list(expected)
    actual = list(actual)
    if expected == actual:
        return
    exp_set, act_set = set(expected), set(actual)
    missing = [f for f in expected if f not in act_set]
    extra = [f for f in actual if f not in exp_set]
    if not missing and not extra:
        raise SchemaError(f"{what}: feature order differs")
    raise SchemaError(f"{what}: schema mismatch", missing=missing, extra=extra)


def detect_arrays(
    ref_X: np.ndarray,
    cur_X: np.ndarray,
    schema: Sequence[str],
    weights: FeatureWeights,
    cfg: DriftTestConfig,
    scope: str = "global",
) -> DriftReport:
    """Drift report for two feature matrices sharing ``schema`` column order."""
    check_schema(schema, weights.entries.keys(), "weights")
    results = []
    for j, name in enumerate(schema):
        results.append(feature_severity(ref_X[:, j], cur_X[:, j], cfg, name, weights[name]))
    total = combine(results, weights)
    share = sum(r.outcome.drifted for r in results) / len(results)
    return DriftReport(
        overall_severity=total,
        drifted=total >= cfg.severity_threshold,
        share_drifted=share,
        per_feature=tuple(results),
        scope=scope,
        severity_threshold=cfg.severity_threshold,
    )


def detect(ref_window, cur_window, weights: FeatureWeights, cfg: DriftTestConfig) -> DriftReport:
    """Unsupervised (label-free) drift report over all samples of both windows."""
    check_schema(ref_window.schema, cur_window.schema, "current window")
    return detect_arrays(ref_window.X, cur_window.X, ref_window.schema, weights, cfg)


def detect_per_class(
    ref_window,
    cur_window,
    weights: FeatureWeights,
    cfg: DriftTestConfig,
    min_samples: int = MIN_CLASS_SAMPLES,
    classes: Optional[Iterable[str]] = None,
) -> dict:
    """Per-class drift reports, grouping samples by their true labels.

    The per-feature test is always KS in this mode (class-level windows
    are usually small). Classes with fewer than ``min_samples`` samples in
    either window map to an :class:`AbsentClass` marker.
    """
    if ref_window.labels is None or cur_window.labels is None:
        raise DataError("per-class detection needs labeled windows")
    check_schema(ref_window.schema, cur_window.schema, "current window")
    if cfg.test_kind != "ks":
        cfg = replace(cfg, test_kind="ks")
    if classes is None:
        classes = set(ref_window.labels.tolist()) | set(cur_window.labels.tolist())
    out = {}
    for cls in sorted(classes):
        ref_mask = ref_window.labels == cls
        cur_mask = cur_window.labels == cls
        n_ref, n_cur = int(ref_mask.sum()), int(cur_mask.sum())
        if n_ref < min_samples or n_cur < min_samples:
            out[cls] = AbsentClass(n_ref, n_cur)
            continue
        out[cls] = detect_arrays(
            ref_window.X[ref_mask],
            cur_window.X[cur_mask],
            ref_window.schema,
            weights,
            cfg,
            scope=f"class:{cls}",
        )
    return out
