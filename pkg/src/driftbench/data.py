"""Labeled feature streams: CSV ingestion, windowing and reference upkeep."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .detector import check_schema
from .errors import DataError

_DURATION_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400, "w": 7 * 86400}


@dataclass(frozen=True)
class Dataset:
    """Column-oriented sample container.

    Row ``i`` is one sample: ``X[i]`` in ``schema`` order, ``labels[i]`` and
    ``timestamps[i]`` (epoch seconds, UTC) when present.
    """

    schema: tuple
    X: np.ndarray
    labels: Optional[np.ndarray] = None
    timestamps: Optional[np.ndarray] = None
    time_format: Optional[str] = None
    label_column: str = "label"
    time_column: Optional[str] = None

    def __post_init__(self):
        n = self.X.shape[0]
        if self.X.ndim != 2 or self.X.shape[1] != len(self.schema):
            raise DataError("feature matrix does not match the schema")
        if self.labels is not None and self.labels.shape[0] != n:
            raise DataError("label count differs from sample count")
        if self.timestamps is not None and self.timestamps.shape[0] != n:
            raise DataError("timestamp count differs from sample count")

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def classes(self) -> list:
        return [] if self.labels is None else sorted(set(self.labels.tolist()))

    def take(self, index) -> "Dataset":
        return replace(
            self,
            X=self.X[index],
            labels=None if self.labels is None else self.labels[index],
            timestamps=None if self.timestamps is None else self.timestamps[index],
        )


def _parse_timestamps(cells: Sequence[str], column: str):
    """Epoch seconds if every cell is numeric, ISO-8601 otherwise."""
    try:
        values = [float(c) for c in cells]
    except ValueError:
        values = None
    if values is not None:
        arr = np.array(values, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            bad = int(np.argmin(np.isfinite(arr))) + 1
            raise DataError(f"row {bad}: non-finite timestamp in column {column!r}")
        return arr, "epoch"
    out = []
    for i, cell in enumerate(cells, start=1):
        text = cell.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        try:
            ts = datetime.fromisoformat(text)
        except ValueError:
            raise DataError(f"row {i}: unparseable timestamp {cell!r} in column {column!r}") from None
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        out.append(ts.timestamp())
    return np.array(out, dtype=np.float64), "iso"


def ingest(path: Union[str, Path], label_column: Optional[str] = "label", time_column: Optional[str] = None) -> Dataset:
    """Read a CSV file with a header row into a :class:`Dataset`.

    Every column except the label and time columns is a numeric feature.
    With a time column, rows are sorted by timestamp (stable); otherwise
    file order is kept. Row numbers in errors count data rows from 1.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = list(reader)
    header = [h.strip() for h in header]
    for col in (label_column, time_column):
        if col is not None and col not in header:
            raise DataError(f"{path}: missing column {col!r}")
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names")
    feature_idx = [i for i, h in enumerate(header) if h not in (label_column, time_column)]
    if not feature_idx:
        raise DataError(f"{path}: no feature columns")
    schema = tuple(header[i] for i in feature_idx)

    X = np.empty((len(rows), len(feature_idx)), dtype=np.float64)
    labels = []
    times = []
    label_i = header.index(label_column) if label_column is not None else None
    time_i = header.index(time_column) if time_column is not None else None
    for r, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise DataError(f"{path}: row {r}: expected {len(header)} cells, got {len(row)}")
        for j, i in enumerate(feature_idx):
            try:
                v = float(row[i])
            except ValueError:
                raise DataError(f"{path}: row {r}: non-numeric value {row[i]!r} in column {header[i]!r}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: row {r}: non-finite value in column {header[i]!r}")
            X[r - 1, j] = v
        if label_i is not None:
            labels.append(row[label_i])
        if time_i is not None:
            times.append(row[time_i])

    ts, fmt = (None, None)
    if time_i is not None:
        ts, fmt = _parse_timestamps(times, time_column) if rows else (np.empty(0), "epoch")
    data = Dataset(
        schema=schema,
        X=X,
        labels=np.array(labels, dtype=str) if label_i is not None else None,
        timestamps=ts,
        time_format=fmt,
        label_column=label_column or "label",
        time_column=time_column,
    )
    if ts is not None:
        data = data.take(np.argsort(ts, kind="stable"))
    return data


def _format_time(t: float, fmt: Optional[str]) -> str:
    if fmt == "iso":
        return datetime.fromtimestamp(t, tz=timezone.utc).isoformat()
    return str(int(t)) if float(t).is_integer() else repr(float(t))


def write_csv(data: Dataset, path: Union[str, Path]) -> None:
    """Write ``data`` in the format :func:`ingest` reads (floats round-trip exactly)."""
    header = []
    if data.timestamps is not None:
        header.append(data.time_column or "timestamp")
    header.extend(data.schema)
    if data.labels is not None:
        header.append(data.label_column)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(len(data)):
            row = []
            if data.timestamps is not None:
                row.append(_format_time(data.timestamps[i], data.time_format))
            row.extend(repr(float(v)) for v in data.X[i])
            if data.labels is not None:
                row.append(data.labels[i])
            writer.writerow(row)


def filter_classes(data: Dataset, class_list: Iterable[str], keep: bool = True) -> Dataset:
    """Keep (or drop) exactly the samples whose label is in ``class_list``."""
    wanted = set(class_list)
    if not wanted:
        raise DataError("class list is empty")
    if data.labels is None:
        raise DataError("dataset has no labels")
    if wanted.isdisjoint(data.labels.tolist()):
        raise DataError(f"none of the classes {sorted(wanted)} occur in the dataset")
    mask = np.isin(data.labels.astype(str), sorted(wanted))
    return data.take(mask if keep else ~mask)


@dataclass(frozen=True)
class WindowMode:
    kind: str  # "time" or "count"
    size: float  # seconds for time windows, samples for count windows

    def __post_init__(self):
        if self.kind not in ("time", "count"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if not self.size > 0:
            raise ValueError("window size must be positive")
        if self.kind == "count" and int(self.size) != self.size:
            raise ValueError("count windows need an integer size")

    def __str__(self) -> str:
        if self.kind == "count":
            return f"count:{int(self.size)}"
        return f"time:{int(self.size)}s" if float(self.size).is_integer() else f"time:{self.size}s"


def parse_window_mode(text: str) -> WindowMode:
    """Parse ``time:<n><s|m|h|d|w>`` or ``count:<n>``."""
    kind, sep, arg = text.strip().partition(":")
    if not sep:
        raise ValueError(f"window mode must look like time:1d or count:N, got {text!r}")
    if kind == "count":
        if not arg.isdigit() or int(arg) < 1:
            raise ValueError(f"bad sample count {arg!r}")
        return WindowMode("count", int(arg))
    if kind == "time":
        m = re.fullmatch(r"(\d+(?:\.\d+)?)([smhdw])", arg)
        if not m:
            raise ValueError(f"bad duration {arg!r}; use e.g. 1d, 6h, 30m")
        return WindowMode("time", float(m.group(1)) * _DURATION_UNITS[m.group(2)])
    raise ValueError(f"unknown window kind {kind!r}")


@dataclass(frozen=True)
class Window:
    id: int
    schema: tuple
    X: np.ndarray
    labels: Optional[np.ndarray] = None
    timestamps: Optional[np.ndarray] = None
    time_range: Optional[tuple] = None
    partial: bool = False
    gap: bool = False

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def size(self) -> int:
        return self.X.shape[0]


def _slice_window(data: Dataset, wid: int, lo: int, hi: int, **kw) -> Window:
    return Window(
        id=wid,
        schema=data.schema,
        X=data.X[lo:hi],
        labels=None if data.labels is None else data.labels[lo:hi],
        timestamps=None if data.timestamps is None else data.timestamps[lo:hi],
        **kw,
    )


def make_windows(data: Dataset, mode: WindowMode) -> list:
    """Cut ``data`` into contiguous, non-overlapping windows.

    Count windows keep a short trailing window flagged ``partial``. Time
    windows are aligned to multiples of the duration since the Unix epoch
    (UTC midnight for whole days); spans without samples become empty
    windows flagged ``gap``.
    """
    n = len(data)
    if n == 0:
        raise DataError("no samples to window")
    if mode.kind == "count":
        size = int(mode.size)
        out = []
        for wid, lo in enumerate(range(0, n, size)):
            hi = min(lo + size, n)
            out.append(_slice_window(data, wid, lo, hi, partial=hi - lo < size))
        return out
    if data.timestamps is None:
        raise DataError("time windows need timestamps")
    if np.any(np.diff(data.timestamps) < 0):
        data = data.take(np.argsort(data.timestamps, kind="stable"))
    ts = data.timestamps
    start = math.floor(ts[0] / mode.size) * mode.size
    count = int(math.floor((ts[-1] - start) / mode.size)) + 1
    edges = start + mode.size * np.arange(count + 1)
    cuts = np.searchsorted(ts, edges, side="left")
    out = []
    for wid in range(count):
        lo, hi = int(cuts[wid]), int(cuts[wid + 1])
        rng = (float(edges[wid]), float(edges[wid + 1]))
        out.append(_slice_window(data, wid, lo, hi, time_range=rng, gap=hi == lo))
    return out


def concat_windows(windows: Sequence[Window], wid: int = 0) -> Window:
    """Merge consecutive windows into one, keeping sample order."""
    if not windows:
        raise DataError("nothing to merge")
    schema = windows[0].schema
    for w in windows[1:]:
        check_schema(schema, w.schema, f"window {w.id}")
    labeled = all(w.labels is not None for w in windows)
    timed = all(w.timestamps is not None for w in windows)
    ranges = [w.time_range for w in windows if w.time_range is not None]
    return Window(
        id=wid,
        schema=schema,
        X=np.concatenate([w.X for w in windows]),
        labels=np.concatenate([w.labels for w in windows]) if labeled else None,
        timestamps=np.concatenate([w.timestamps for w in windows]) if timed else None,
        time_range=(ranges[0][0], ranges[-1][1]) if ranges else None,
    )


def update_reference(ref: Window, new: Window) -> Window:
    """Replace the oldest reference samples with the samples of ``new``.

    The reference keeps its size: ``min(len(new), len(ref))`` oldest samples
    leave, and ``new`` (cut to its newest ``len(ref)`` samples) is appended.
    """
    check_schema(ref.schema, new.schema, "new window")
    size = len(ref)
    k = min(len(new), size)
    if k == 0:
        return ref

    def join(old, fresh):
        if old is None or fresh is None:
            return None
        return np.concatenate([old[k:], fresh[len(fresh) - k:]])

    ts = join(ref.timestamps, new.timestamps)
    return Window(
        id=ref.id,
        schema=ref.schema,
        X=join(ref.X, new.X),
        labels=join(ref.labels, new.labels),
        timestamps=ts,
        time_range=(float(ts.min()), float(ts.max())) if ts is not None and ts.size else ref.time_range,
    )
