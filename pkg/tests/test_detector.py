import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from driftbench.data import Window
from driftbench.detector import (
    AbsentClass,
    DriftTestConfig,
    FeatureWeights,
    detect,
    detect_arrays,
    detect_per_class,
    feature_severity,
    load_weights,
    normalize_weights,
    save_weights,
)
from driftbench.errors import DataError, SchemaError
from oracles import brute_ks


def window(X, schema, labels=None, wid=0):
    X = np.asarray(X, dtype=float)
    if labels is not None:
        labels = np.asarray(labels, dtype=str)
    return Window(wid, tuple(schema), X, labels)


def two_feature_windows():
    """Feature a moves by 100, feature b stays put."""
    rng = np.random.default_rng(3)
    ref = rng.normal(size=(300, 2))
    cur = ref.copy()
    cur[:, 0] += 100.0
    return window(ref, "ab"), window(cur, "ab")


@pytest.mark.parametrize(
    "raw, expected, fallback",
    [
        ({"f1": 2, "f2": 2}, {"f1": 0.5, "f2": 0.5}, False),
        ({"f1": 1, "f2": 3}, {"f1": 0.25, "f2": 0.75}, False),
        ({"f1": 0, "f2": 0}, {"f1": 0.5, "f2": 0.5}, True),
    ],
)
def test_normalize_weights(raw, expected, fallback):
    w = normalize_weights(raw)
    assert w.to_dict() == expected
    assert w.uniform_fallback is fallback


@pytest.mark.parametrize("raw", [{}, {"a": -1.0, "b": 2.0}, {"a": float("nan")}])
def test_normalize_weights_rejects(raw):
    with pytest.raises(ValueError):
        normalize_weights(raw)


def test_feature_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        FeatureWeights({"a": 0.5, "b": 0.6})


def test_weights_file_roundtrip(tmp_path):
    w = normalize_weights({"a": 1.0, "b": 3.0})
    path = tmp_path / "w.json"
    save_weights(w, path)
    assert load_weights(path) == w


def test_weights_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([1, 2]))
    with pytest.raises(DataError):
        load_weights(bad)
    bad.write_text(json.dumps({"a": "x"}))
    with pytest.raises(DataError):
        load_weights(bad)


@pytest.mark.parametrize(
    "kw",
    [{"test_kind": "chi2"}, {"alpha": 0.0}, {"tau": -1.0}, {"severity_threshold": 0.0}, {"severity_mode": "soft"}],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        DriftTestConfig(**kw)


def test_feature_severity_examples():
    ks = DriftTestConfig(test_kind="ks", alpha=0.05)
    col = np.arange(50.0)
    assert feature_severity(col, col, ks).severity == 0.0
    assert feature_severity([0.0] * 100, [1.0] * 100, ks).severity == 1.0
    ref = np.array([0.0, 2.0] * 50)
    res = feature_severity(ref, ref + 0.01, DriftTestConfig(test_kind="wasserstein", tau=0.05))
    assert res.outcome.statistic == pytest.approx(0.01, abs=1e-12)
    assert res.severity == 0.0


def test_feature_severity_statistic_mode():
    cfg = DriftTestConfig(test_kind="ks", severity_mode="statistic")
    a, b = [1, 2, 3, 4], [2, 3, 4, 5]
    assert feature_severity(a, b, cfg).severity == brute_ks(a, b)
    cfg_w = DriftTestConfig(test_kind="wasserstein", severity_mode="statistic")
    assert feature_severity([0.0, 2.0], [30.0, 32.0], cfg_w).severity == 1.0


def test_detect_identical_windows():
    ref, _ = two_feature_windows()
    rep = detect(ref, ref, FeatureWeights.uniform(ref.schema), DriftTestConfig())
    assert rep.overall_severity == 0.0 and not rep.drifted and rep.share_drifted == 0.0


@pytest.mark.parametrize("threshold", [0.05, 0.5, 1.0])
def test_detect_full_weight_on_drifted_feature(threshold):
    ref, cur = two_feature_windows()
    rep = detect(ref, cur, FeatureWeights({"a": 1.0, "b": 0.0}), DriftTestConfig(severity_threshold=threshold))
    assert rep.severities() == {"a": 1.0, "b": 0.0}
    assert rep.overall_severity == 1.0 and rep.drifted


def test_detect_weighted_sum():
    ref, cur = two_feature_windows()
    # swap columns so that the low-weight feature is the drifted one
    ref = window(ref.X[:, ::-1], "ab")
    cur = window(cur.X[:, ::-1], "ab")
    rep = detect(ref, cur, FeatureWeights({"a": 0.8, "b": 0.2}), DriftTestConfig())
    assert rep.severities() == {"a": 0.0, "b": 1.0}
    assert rep.overall_severity == pytest.approx(0.2, abs=1e-15)
    assert rep.share_drifted == 0.5


def test_uniform_weights_give_share():
    ref, cur = two_feature_windows()
    rep = detect(ref, cur, FeatureWeights.uniform(ref.schema), DriftTestConfig())
    assert rep.overall_severity == rep.share_drifted == 0.5


def test_schema_mismatch():
    ref, cur = two_feature_windows()
    other = window(cur.X, "ac")
    with pytest.raises(SchemaError) as err:
        detect(ref, other, FeatureWeights.uniform("ab"), DriftTestConfig())
    assert list(err.value.missing) == ["b"] and list(err.value.extra) == ["c"]
    with pytest.raises(SchemaError):
        detect(ref, window(cur.X, "ba"), FeatureWeights.uniform("ab"), DriftTestConfig())
    with pytest.raises(SchemaError):
        detect(ref, cur, FeatureWeights.uniform("abc"), DriftTestConfig())


@given(st.lists(st.floats(0, 10), min_size=2, max_size=8), st.data())
def test_severity_is_weighted_sum(raw, data):
    n = len(raw)
    if sum(raw) == 0:
        raw[0] = 1.0
    names = [f"f{i}" for i in range(n)]
    weights = normalize_weights(dict(zip(names, raw)))
    drift_mask = data.draw(st.lists(st.booleans(), min_size=n, max_size=n))
    base = np.linspace(0.0, 1.0, 40)
    ref = np.tile(base[:, None], (1, n))
    cur = ref + np.where(drift_mask, 50.0, 0.0)
    rep = detect_arrays(ref, cur, names, weights, DriftTestConfig())
    expected = math.fsum(w * s for w, s in zip(weights.entries.values(), map(float, drift_mask)))
    assert rep.overall_severity == pytest.approx(expected, abs=1e-12)


def labeled_windows():
    rng = np.random.default_rng(11)
    labels = np.array(["x"] * 200 + ["y"] * 200)
    ref = rng.normal(size=(400, 3))
    cur = rng.normal(size=(400, 3))
    cur[:200] += 10.0
    return window(ref, "pqr", labels), window(cur, "pqr", labels, wid=1)


def test_per_class_detection():
    ref, cur = labeled_windows()
    cfg = DriftTestConfig(test_kind="wasserstein")
    out = detect_per_class(ref, cur, FeatureWeights.uniform(ref.schema), cfg)
    assert list(out) == ["x", "y"]
    assert out["x"].drifted and out["x"].overall_severity == 1.0
    assert not out["y"].drifted
    # the per-class test is KS regardless of the configured global test
    for j, res in enumerate(out["x"].per_feature):
        assert res.outcome.p_value is not None
        assert res.outcome.statistic == brute_ks(ref.X[:200, j], cur.X[:200, j])
    assert out["x"].scope == "class:x"


def test_per_class_identical():
    ref, _ = labeled_windows()
    out = detect_per_class(ref, ref, FeatureWeights.uniform(ref.schema), DriftTestConfig())
    assert all(r.overall_severity == 0.0 for r in out.values())


def test_per_class_absent_marker():
    ref, cur = labeled_windows()
    cur_labels = cur.labels.copy()
    cur_labels[:3] = "z"
    cur = window(cur.X, "pqr", cur_labels)
    out = detect_per_class(ref, cur, FeatureWeights.uniform(ref.schema), DriftTestConfig())
    assert out["z"] == AbsentClass(0, 3)
    assert out["z"].to_dict()["absent"] is True


def test_per_class_needs_labels():
    ref, cur = two_feature_windows()
    with pytest.raises(DataError):
        detect_per_class(ref, cur, FeatureWeights.uniform("ab"), DriftTestConfig())
