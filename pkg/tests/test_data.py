import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from driftbench.data import (
    Dataset,
    Window,
    WindowMode,
    concat_windows,
    filter_classes,
    ingest,
    make_windows,
    parse_window_mode,
    update_reference,
    write_csv,
)
from driftbench.errors import DataError

DAY = 86400
T0 = 1640995200  # 2022-01-01T00:00:00Z


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_ingest_basic(tmp_path):
    p = write(tmp_path, "ts,f1,f2,label\n3,1.0,2.0,a\n1,3.0,4.0,b\n2,5.0,6.0,a\n")
    data = ingest(p, "label", "ts")
    assert len(data) == 3
    assert data.schema == ("f1", "f2")
    assert data.timestamps.tolist() == [1.0, 2.0, 3.0]
    assert data.labels.tolist() == ["b", "a", "a"]
    assert data.X[:, 0].tolist() == [3.0, 5.0, 1.0]
    assert data.time_format == "epoch"


def test_ingest_iso_timestamps(tmp_path):
    p = write(tmp_path, "ts,f1,label\n2022-01-02T00:00:00Z,1,a\n2022-01-01T12:00:00+00:00,2,b\n")
    data = ingest(p, "label", "ts")
    assert data.time_format == "iso"
    assert data.timestamps.tolist() == [T0 + DAY / 2, T0 + DAY]


@pytest.mark.parametrize(
    "text, needle",
    [
        ("f1,f2,label\n1,2,a\nnan,3,b\n", "row 2"),
        ("f1,f2,label\n1,2,a\n1,x,b\n", "row 2"),
        ("f1,f2,label\n1,2,a\n1,b\n", "row 2"),
        ("f1,f2\n1,2\n", "missing column 'label'"),
        ("", "empty file"),
        ("label\na\n", "no feature columns"),
    ],
)
def test_ingest_errors(tmp_path, text, needle):
    with pytest.raises(DataError, match=needle):
        ingest(write(tmp_path, text), "label")


def test_ingest_missing_file(tmp_path):
    with pytest.raises(DataError):
        ingest(tmp_path / "nope.csv")


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    data = Dataset(("a", "b"), rng.normal(size=(20, 2)), np.array(list("xy") * 10), T0 + np.arange(20.0), "epoch", "label", "ts")
    p = tmp_path / "out.csv"
    write_csv(data, p)
    back = ingest(p, "label", "ts")
    assert np.array_equal(back.X, data.X)
    assert back.labels.tolist() == data.labels.tolist()
    assert np.array_equal(back.timestamps, data.timestamps)


def dataset(n, step=1.0, t0=T0):
    X = np.arange(n, dtype=float)[:, None]
    return Dataset(("f",), X, np.array(["a", "b"] * (n // 2) + ["a"] * (n % 2)), t0 + step * np.arange(n), "epoch", "label", "ts")


def test_count_windows():
    wins = make_windows(dataset(25), WindowMode("count", 10))
    assert [len(w) for w in wins] == [10, 10, 5]
    assert [w.partial for w in wins] == [False, False, True]


def test_time_windows_follow_utc_days():
    # 3 days of samples starting mid-morning
    data = dataset(72, step=3600, t0=T0 + 10 * 3600)
    wins = make_windows(data, parse_window_mode("time:1d"))
    assert len(wins) == 4
    assert wins[0].time_range == (T0, T0 + DAY)
    assert [len(w) for w in wins] == [14, 24, 24, 10]
    exact = make_windows(dataset(72, step=3600), parse_window_mode("time:1d"))
    assert [len(w) for w in exact] == [24, 24, 24]


def test_time_windows_mark_gaps():
    ts = np.concatenate([T0 + np.arange(5.0), T0 + 2 * DAY + np.arange(5.0)])
    data = Dataset(("f",), np.zeros((10, 1)), None, ts, "epoch", "label", "ts")
    wins = make_windows(data, parse_window_mode("time:1d"))
    assert [len(w) for w in wins] == [5, 0, 5]
    assert [w.gap for w in wins] == [False, True, False]


@pytest.mark.parametrize("text, kind, size", [("time:1d", "time", DAY), ("time:6h", "time", 21600), ("count:500", "count", 500)])
def test_parse_window_mode(text, kind, size):
    mode = parse_window_mode(text)
    assert (mode.kind, mode.size) == (kind, size)


@pytest.mark.parametrize("text", ["1d", "time:1x", "count:0", "count:abc", "hour:1"])
def test_parse_window_mode_rejects(text):
    with pytest.raises(ValueError):
        parse_window_mode(text)


def win(values, wid=0):
    X = np.asarray(values, dtype=float)[:, None]
    return Window(wid, ("f",), X, np.array(["a"] * len(values)), np.asarray(values, dtype=float))


def test_update_reference_examples():
    ref = win(range(100))
    out = update_reference(ref, win(range(100, 130)))
    assert out.X[:, 0].tolist() == list(range(30, 130))
    big = update_reference(ref, win(range(200, 350)))
    assert big.X[:, 0].tolist() == list(range(250, 350))
    assert update_reference(ref, win([])) is ref


@given(st.integers(1, 60), st.integers(0, 90))
def test_update_reference_keeps_size(n_ref, n_new):
    ref = win(range(n_ref))
    new = win(range(1000, 1000 + n_new))
    out = update_reference(ref, new)
    assert len(out) == n_ref
    expected = (list(range(n_ref)) + list(range(1000, 1000 + n_new)))[-n_ref:]
    assert out.X[:, 0].tolist() == expected


def test_concat_windows():
    merged = concat_windows([win([1, 2]), win([3])], wid=9)
    assert merged.id == 9 and merged.X[:, 0].tolist() == [1, 2, 3]


def test_filter_classes_partition():
    data = dataset(10)
    keep = filter_classes(data, ["a"], keep=True)
    drop = filter_classes(data, ["a"], keep=False)
    assert set(keep.labels.tolist()) == {"a"}
    assert set(drop.labels.tolist()) == {"b"}
    assert len(keep) + len(drop) == len(data)
    merged = sorted(keep.X[:, 0].tolist() + drop.X[:, 0].tolist())
    assert merged == data.X[:, 0].tolist()


def test_filter_classes_errors():
    with pytest.raises(DataError):
        filter_classes(dataset(4), [], keep=True)
    with pytest.raises(DataError):
        filter_classes(dataset(4), ["zzz"], keep=True)
