"""Random forest of Gini CART trees, plus F1 scoring.

The forest is the importance-producing classifier behind the drift
weights. Trees are stored as flat node arrays for vectorized prediction
and serialized as nested split/leaf records.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .detector import FeatureWeights, check_schema, normalize_weights
from .errors import DataError

MODEL_FORMAT = "driftbench.forest/1"


@dataclass(frozen=True)
class ForestParams:
    tree_count: int = 50
    max_depth: int = 12
    min_leaf_size: int = 2
    rng_seed: int = 0

    def __post_init__(self):
        if self.tree_count < 1:
            raise ValueError("tree_count must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf_size < 1:
            raise ValueError("min_leaf_size must be >= 1")

    def to_dict(self) -> dict:
        return {
            "tree_count": self.tree_count,
            "max_depth": self.max_depth,
            "min_leaf_size": self.min_leaf_size,
            "rng_seed": self.rng_seed,
        }


@dataclass(frozen=True)
class Tree:
    """One fitted tree in flat form. ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes, n_classes) class probabilities

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``X``."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        idx = np.arange(X.shape[0]) if self.feature[0] >= 0 else np.empty(0, dtype=np.int64)
        while idx.size:
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            nxt = np.where(go_left, self.left[cur], self.right[cur])
            node[idx] = nxt
            idx = idx[self.feature[nxt] >= 0]
        return node

    def to_record(self, schema: Sequence[str], node: int = 0) -> dict:
        f = int(self.feature[node])
        if f < 0:
            return {"leaf": [float(p) for p in self.value[node]]}
        return {
            "feature": schema[f],
            "threshold": float(self.threshold[node]),
            "left": self.to_record(schema, int(self.left[node])),
            "right": self.to_record(schema, int(self.right[node])),
        }

    @classmethod
    def from_record(cls, record: dict, schema: Sequence[str], n_classes: int) -> "Tree":
        index = {name: i for i, name in enumerate(schema)}
        feature, threshold, left, right, value = [], [], [], [], []

        def visit(rec):
            node = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append([0.0] * n_classes)
            if "leaf" in rec:
                if len(rec["leaf"]) != n_classes:
                    raise DataError("leaf probability vector has the wrong length")
                value[node] = [float(p) for p in rec["leaf"]]
                return node
            if rec["feature"] not in index:
                raise DataError(f"tree splits on unknown feature {rec['feature']!r}")
            feature[node] = index[rec["feature"]]
            threshold[node] = float(rec["threshold"])
            left[node] = visit(rec["left"])
            right[node] = visit(rec["right"])
            return node

        visit(record)
        return cls(
            np.array(feature, dtype=np.int64),
            np.array(threshold, dtype=np.float64),
            np.array(left, dtype=np.int64),
            np.array(right, dtype=np.int64),
            np.array(value, dtype=np.float64).reshape(len(feature), n_classes),
        )


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float(np.dot(p, p))


class _TreeBuilder:
    def __init__(self, X, y, n_classes, params: ForestParams, rng, importances):
        self.X = X
        self.y = y
        self.n_classes = n_classes
        self.params = params
        self.rng = rng
        self.importances = importances
        self.n_total = y.size
        self.n_candidates = max(1, math.isqrt(X.shape[1]))
        self._cols = np.arange(self.n_candidates)
        self._ramp = np.arange(1, y.size + 1, dtype=np.float64)[:, None]
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def _new_node(self, counts):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(counts / counts.sum())
        return len(self.feature) - 1

    def _best_split(self, idx, counts):
        """Best (feature, threshold, gain) over a random feature subset, or None.

        All candidate features are scanned at once: column ``j`` of every
        intermediate array belongs to candidate ``cands[j]``.
        """
        n = idx.size
        min_leaf = self.params.min_leaf_size
        k = self.n_candidates
        cands = self.rng.choice(self.X.shape[1], size=k, replace=False)
        x = self.X.take(idx, axis=0).take(cands, axis=1)
        order = np.argsort(x, axis=0)
        xs = x[order, self._cols]
        # per cut: sum_c L_c^2 and sum_c L_c * T_c, with L_c the class-c count
        # left of the cut and T_c the node total; right-hand squares follow
        # from sum (T - L)^2 = T.T - 2 L.T + L.L. Everything is an exact integer.
        y_sorted = self.y[idx][order[:-1]]
        left_sq = np.zeros((n - 1, k), dtype=np.int64)
        left_dot = np.zeros((n - 1, k), dtype=np.int64)
        total = counts.astype(np.int64)
        for c in np.flatnonzero(total):
            left_c = np.cumsum(y_sorted == c, axis=0)
            left_sq += left_c * left_c
            left_dot += int(total[c]) * left_c
        right_sq = int(total @ total) - 2 * left_dot + left_sq
        n_left = self._ramp[: n - 1]
        # n * weighted child impurity = n - score
        score = left_sq / n_left
        score += right_sq / (n - n_left)
        invalid = xs[:-1] == xs[1:]
        if min_leaf > 1:
            invalid[: min_leaf - 1] = True
            invalid[n - min_leaf :] = True
        score[invalid] = -np.inf
        flat = int(np.argmax(score.T))  # feature-major: earlier candidate wins ties
        j, pos = divmod(flat, n - 1)
        if score[pos, j] == -np.inf:
            return None
        gain = _gini(counts) - (n - score[pos, j]) / n
        lo, hi = xs[pos, j], xs[pos + 1, j]
        thr = (lo + hi) / 2.0
        if not thr < hi:
            thr = lo
        return int(cands[j]), float(thr), float(gain)

    def build(self, idx, depth=0):
        counts = np.bincount(self.y[idx], minlength=self.n_classes).astype(np.float64)
        node = self._new_node(counts)
        if depth >= self.params.max_depth or idx.size < 2 * self.params.min_leaf_size:
            return node
        if np.count_nonzero(counts) <= 1:
            return node
        split = self._best_split(idx, counts)
        if split is None or split[2] <= 0.0:
            return node
        f, thr, gain = split
        self.importances[f] += idx.size / self.n_total * gain
        go_left = self.X[idx, f] <= thr
        self.feature[node] = f
        self.threshold[node] = thr
        self.left[node] = self.build(idx[go_left], depth + 1)
        self.right[node] = self.build(idx[~go_left], depth + 1)
        return node

    def tree(self) -> Tree:
        return Tree(
            np.array(self.feature, dtype=np.int64),
            np.array(self.threshold, dtype=np.float64),
            np.array(self.left, dtype=np.int64),
            np.array(self.right, dtype=np.int64),
            np.vstack(self.value),
        )


@dataclass(frozen=True)
class TrainedModel:
    schema: tuple
    classes: tuple
    trees: tuple
    raw_importances: Mapping[str, float]
    params: ForestParams

    def predict(self, X) -> list:
        return predict(self, X)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "schema": list(self.schema),
            "classes": list(self.classes),
            "hyperparams": self.params.to_dict(),
            "raw_importances": {f: self.raw_importances[f] for f in self.schema},
            "trees": [t.to_record(self.schema) for t in self.trees],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("format") != MODEL_FORMAT:
            raise DataError(f"not a forest model document: format={d.get('format')!r}")
        schema = tuple(d["schema"])
        classes = tuple(d["classes"])
        trees = tuple(Tree.from_record(r, schema, len(classes)) for r in d["trees"])
        return cls(schema, classes, trees, dict(d["raw_importances"]), ForestParams(**d["hyperparams"]))

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        return cls.from_dict(json.loads(text))


def train(X, labels, schema: Sequence[str], params: Optional[ForestParams] = None) -> TrainedModel:
    """Fit a random forest on a labeled feature matrix.

    Each tree sees a bootstrap resample and picks the best Gini split among
    isqrt(n_features) random features per node. Tree ``t`` draws from the
    ``t``-th stream spawned from ``params.rng_seed``, so results depend only
    on the seed and the row order of the input.
    """
    params = params or ForestParams()
    X = np.asarray(X, dtype=np.float64)
    if labels is None:
        raise DataError("training needs labeled samples")
    labels = np.asarray(labels)
    if X.ndim != 2 or X.shape[1] != len(schema):
        raise DataError("feature matrix does not match the schema")
    if X.shape[0] < 2:
        raise DataError("training needs at least 2 samples")
    if labels.shape[0] != X.shape[0]:
        raise DataError("labels and samples differ in length")
    classes, y = np.unique(labels, return_inverse=True)
    n = X.shape[0]
    importances = np.zeros(X.shape[1])
    trees = []
    for stream in np.random.SeedSequence(params.rng_seed).spawn(params.tree_count):
        rng = np.random.default_rng(stream)
        boot = rng.integers(0, n, size=n)
        builder = _TreeBuilder(X, y, len(classes), params, rng, importances)
        builder.build(boot)
        trees.append(builder.tree())
    raw = {name: float(importances[j]) for j, name in enumerate(schema)}
    return TrainedModel(tuple(schema), tuple(str(c) for c in classes), tuple(trees), raw, params)


def predict(model: TrainedModel, X) -> list:
    """Majority vote of per-tree leaf argmax; ties go to the earlier class."""
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        return []
    if X.ndim != 2 or X.shape[1] != len(model.schema):
        raise DataError(f"expected {len(model.schema)} features per sample")
    votes = np.zeros((X.shape[0], len(model.classes)), dtype=np.int64)
    rows = np.arange(X.shape[0])
    for tree in model.trees:
        leaf_class = np.argmax(tree.value, axis=1)
        votes[rows, leaf_class[tree.apply(X)]] += 1
    winners = np.argmax(votes, axis=1)
    return [model.classes[i] for i in winners]


def predict_window(model: TrainedModel, window) -> list:
    check_schema(model.schema, window.schema, "window")
    return predict(model, window.X)


def importances(model: TrainedModel) -> FeatureWeights:
    return normalize_weights({f: model.raw_importances[f] for f in model.schema})


@dataclass(frozen=True)
class F1Breakdown:
    macro_f1: float
    per_class: Mapping[str, float]

    def to_dict(self) -> dict:
        return {"macro_f1": self.macro_f1, "per_class": dict(self.per_class)}


def f1_scores(truth: Sequence, pred: Sequence) -> F1Breakdown:
    """One-vs-rest F1 per class present in ``truth``, and their plain mean."""
    truth = np.asarray([str(t) for t in truth])
    pred = np.asarray([str(p) for p in pred])
    if truth.shape != pred.shape:
        raise ValueError(f"length mismatch: {truth.size} truths vs {pred.size} predictions")
    if truth.size == 0:
        raise ValueError("no samples to score")
    per_class = {}
    for cls in np.unique(truth).tolist():
        is_t = truth == cls
        is_p = pred == cls
        tp = int(np.sum(is_t & is_p))
        fp = int(np.sum(~is_t & is_p))
        fn = int(np.sum(is_t & ~is_p))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        per_class[cls] = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return F1Breakdown(math.fsum(per_class.values()) / len(per_class), per_class)
