"""Seeded synthetic labeled streams with controllable drift.

Each class has Gaussian features with unit variance. The first
``informative_features`` features carry class-dependent means, the rest
are class-independent N(0, 1) noise. A drift moves class means by
``magnitude`` standard deviations; every (class, feature) pair gets its
own random direction, so the class boundaries move and a model trained on
the old concept degrades.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .data import Dataset

PATTERNS = ("none", "sudden", "gradual", "incremental", "recurring")
DRIFT_TARGETS = ("informative", "noise")

# 2022-01-01T00:00:00Z; window w covers synthetic day w.
EPOCH_START = 1640995200
DAY = 86400

_CLASS_MEAN_SPREAD = 3.0


@dataclass(frozen=True)
class DriftScenario:
    """Parameters of a synthetic stream.

    ``drift_classes`` limits the drift to the first that many classes
    (all classes when None). ``drift_target="noise"`` shifts only the last
    (non-informative) feature, for every class, instead of the informative
    ones.
    """

    pattern: str = "sudden"
    n_windows: int = 60
    samples_per_window: int = 2000
    n_features: int = 20
    n_classes: int = 5
    informative_features: Optional[int] = None
    drift_at: int = 20
    transition_len: int = 5
    period: int = 5
    magnitude: float = 5.0
    seed: int = 0
    drift_classes: Optional[int] = None
    drift_target: str = "informative"

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValueError(f"pattern must be one of {PATTERNS}")
        if self.drift_target not in DRIFT_TARGETS:
            raise ValueError(f"drift_target must be one of {DRIFT_TARGETS}")
        for name in ("n_windows", "samples_per_window", "n_features", "transition_len", "period"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_classes < 1:
            raise ValueError("n_classes must be >= 1")
        if not 1 <= self.n_informative <= self.n_features:
            raise ValueError("informative_features must lie in [1, n_features]")
        if self.drift_target == "noise" and self.n_informative == self.n_features:
            raise ValueError("noise drift needs at least one non-informative feature")
        if self.pattern != "none" and not 0 <= self.drift_at < self.n_windows:
            raise ValueError("drift_at must lie in [0, n_windows)")
        if self.magnitude < 0:
            raise ValueError("magnitude must be >= 0")
        if self.drift_classes is not None and not 0 <= self.drift_classes <= self.n_classes:
            raise ValueError("drift_classes must lie in [0, n_classes]")

    @property
    def n_informative(self) -> int:
        if self.informative_features is None:
            return max(1, self.n_features // 2)
        return self.informative_features

    @property
    def feature_names(self) -> tuple:
        return tuple(f"f{i + 1}" for i in range(self.n_features))

    @property
    def class_names(self) -> tuple:
        return tuple(f"c{i}" for i in range(self.n_classes))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "DriftScenario":
        return cls(**d)


def concept_weight(s: DriftScenario, w: int) -> float:
    """Degree (0 = old, 1 = new) of the new concept in window ``w``.

    For ``gradual`` this is the probability that a sample comes from the
    new concept; for ``incremental`` it is the interpolation factor.
    """
    if s.pattern == "none" or w < s.drift_at:
        return 0.0
    if s.pattern == "sudden":
        return 1.0
    if s.pattern in ("gradual", "incremental"):
        return min(1.0, (w - s.drift_at + 1) / s.transition_len)
    # recurring: new, old, new, ... in blocks of ``period`` windows
    return 1.0 if ((w - s.drift_at) // s.period) % 2 == 0 else 0.0


def _base_params(s: DriftScenario):
    rng = np.random.default_rng([s.seed, 0])
    means = np.zeros((s.n_classes, s.n_features))
    means[:, : s.n_informative] = rng.normal(0.0, _CLASS_MEAN_SPREAD, (s.n_classes, s.n_informative))
    shift = np.zeros_like(means)
    if s.drift_target == "informative":
        signs = rng.choice([-1.0, 1.0], size=(s.n_classes, s.n_informative))
        shift[:, : s.n_informative] = s.magnitude * signs
    else:
        shift[:, -1] = s.magnitude
    n_drift = s.n_classes if s.drift_classes is None else s.drift_classes
    shift[n_drift:] = 0.0
    return means, shift


def generate_window(s: DriftScenario, w: int, means=None, shift=None) -> Dataset:
    """Samples of window ``w``; depends only on the scenario and ``w``."""
    if means is None or shift is None:
        means, shift = _base_params(s)
    rng = np.random.default_rng([s.seed, 1, w])
    n = s.samples_per_window
    y = rng.permutation(np.arange(n) % s.n_classes)
    lam = concept_weight(s, w)
    if s.pattern == "gradual":
        factor = (rng.random(n) < lam).astype(np.float64)
    else:
        factor = np.full(n, lam)
    X = means[y] + factor[:, None] * shift[y] + rng.standard_normal((n, s.n_features))
    offsets = np.sort(rng.integers(0, DAY, size=n))
    return Dataset(
        schema=s.feature_names,
        X=X,
        labels=np.array(s.class_names, dtype=str)[y],
        timestamps=(EPOCH_START + w * DAY + offsets).astype(np.float64),
        time_format="epoch",
        label_column="label",
        time_column="timestamp",
    )


def generate_stream(s: DriftScenario) -> Dataset:
    """The whole stream, window after window, one synthetic day each."""
    means, shift = _base_params(s)
    parts = [generate_window(s, w, means, shift) for w in range(s.n_windows)]
    return Dataset(
        schema=s.feature_names,
        X=np.concatenate([p.X for p in parts]),
        labels=np.concatenate([p.labels for p in parts]),
        timestamps=np.concatenate([p.timestamps for p in parts]),
        time_format="epoch",
        label_column="label",
        time_column="timestamp",
    )


def scenario_path(data_path: Union[str, Path]) -> Path:
    p = Path(data_path)
    return p.with_name(p.stem + ".scenario.json")


def write_scenario(s: DriftScenario, data_path: Union[str, Path]) -> Path:
    out = scenario_path(data_path)
    out.write_text(s.to_json(), encoding="utf-8")
    return out
