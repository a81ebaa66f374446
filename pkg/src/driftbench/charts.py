"""Deterministic SVG charts of benchmark logs (no plotting dependency).

Left axis: F1 of both tracks. Right axis: drift strength of both tracks.
A dashed horizontal line marks the severity threshold and a vertical
line marks every window where the retraining track detected drift.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .bench import BenchmarkLog
from .errors import DataError

WIDTH, HEIGHT = 900, 420
LEFT, RIGHT, TOP, BOTTOM = 60, 70, 40, 80

COLORS = {
    "f1_retrain": "#1f77b4",
    "f1_ref": "#7fb2d9",
    "strength_retrain": "#d62728",
    "strength_ref": "#f0a0a0",
    "detection": "#555555",
    "threshold": "#d62728",
}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _series(log: BenchmarkLog, which: str):
    """(title, f1 by track, strength by track) for a chart selector."""
    rows = log.rows
    if which == "global":
        f1 = {wf: [r[f"f1_{wf}"]["macro_f1"] for r in rows] for wf in ("ref", "retrain")}
        st = {wf: [r[f"report_{wf}"]["overall_severity"] for r in rows] for wf in ("ref", "retrain")}
        return "Global drift strength and macro F1", f1, st
    kind, _, name = which.partition(":")
    if kind == "class" and name:
        if name not in log.header.get("classes", []):
            raise DataError(f"unknown class {name!r}")
        f1, st = {}, {}
        for wf in ("ref", "retrain"):
            f1[wf] = [r[f"f1_{wf}"]["per_class"].get(name) for r in rows]
            vals = []
            for r in rows:
                rep = r.get(f"per_class_{wf}", {}).get(name)
                vals.append(None if rep is None or rep.get("absent") else rep["overall_severity"])
            st[wf] = vals
        return f"Class {name}: drift strength and F1", f1, st
    if kind == "feature" and name:
        if name not in log.header["schema"]:
            raise DataError(f"unknown feature {name!r}")
        f1 = {wf: [r[f"f1_{wf}"]["macro_f1"] for r in rows] for wf in ("ref", "retrain")}
        st = {}
        for wf in ("ref", "retrain"):
            st[wf] = [
                next(e["severity"] for e in r[f"report_{wf}"]["per_feature"] if e["feature"] == name) for r in rows
            ]
        return f"Feature {name}: severity and macro F1", f1, st
    raise DataError(f"unknown chart {which!r}; use global, class:<name> or feature:<name>")


def _polylines(xs, ys, to_x, to_y, color, dashed, cls):
    """One polyline per run of non-null points."""
    out, run = [], []
    for x, y in list(zip(xs, ys)) + [(None, None)]:
        if y is None:
            if run:
                pts = " ".join(f"{_fmt(to_x(a))},{_fmt(to_y(b))}" for a, b in run)
                dash = ' stroke-dasharray="5,3"' if dashed else ""
                out.append(
                    f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>'
                )
                run = []
            continue
        run.append((x, y))
    return out


def render_svg(log: BenchmarkLog, which: str = "global") -> str:
    """Render one chart as a standalone SVG document."""
    if not log.rows:
        raise DataError("log has no evaluated windows")
    title, f1, strength = _series(log, which)
    ids = [r["window_id"] for r in log.rows]
    x_lo, x_hi = min(ids), max(ids)
    span = max(1, x_hi - x_lo)
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM
    y_max = max([1.0] + [v for vals in strength.values() for v in vals if v is not None])

    def to_x(i):
        return LEFT + (i - x_lo) / span * plot_w

    def to_f1(v):
        return TOP + (1.0 - v) * plot_h

    def to_strength(v):
        return TOP + (1.0 - v / y_max) * plot_h

    bottom = TOP + plot_h
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<title>{escape(title)}</title>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>',
    ]
    for k in range(5):
        frac = k / 4
        y = TOP + (1 - frac) * plot_h
        parts.append(f'<line x1="{LEFT}" y1="{_fmt(y)}" x2="{LEFT + plot_w}" y2="{_fmt(y)}" stroke="#eee"/>')
        parts.append(f'<text x="{LEFT - 6}" y="{_fmt(y + 4)}" text-anchor="end">{frac:.2f}</text>')
        parts.append(
            f'<text x="{LEFT + plot_w + 6}" y="{_fmt(y + 4)}" text-anchor="start">{frac * y_max:.2f}</text>'
        )
    step = max(1, span // 10)
    for i in range(x_lo, x_hi + 1, step):
        x = to_x(i)
        parts.append(f'<line x1="{_fmt(x)}" y1="{bottom}" x2="{_fmt(x)}" y2="{bottom + 4}" stroke="#333"/>')
        parts.append(f'<text x="{_fmt(x)}" y="{bottom + 16}" text-anchor="middle">{i}</text>')
    parts.append(f'<text x="{LEFT + plot_w / 2:.1f}" y="{bottom + 32}" text-anchor="middle">window</text>')
    parts.append(
        f'<text x="16" y="{TOP + plot_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {TOP + plot_h / 2:.1f})">F1</text>'
    )
    rx = WIDTH - 14
    parts.append(
        f'<text x="{rx}" y="{TOP + plot_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(90 {rx} {TOP + plot_h / 2:.1f})">drift strength</text>'
    )

    for row in log.rows:
        if row["retrained"]:
            x = _fmt(to_x(row["window_id"]))
            parts.append(
                f'<line class="detection" x1="{x}" y1="{TOP}" x2="{x}" y2="{bottom}" '
                f'stroke="{COLORS["detection"]}" stroke-width="1" opacity="0.6"/>'
            )
    thr = log.severity_threshold
    ty = _fmt(to_strength(thr))
    parts.append(
        f'<line class="threshold" x1="{LEFT}" y1="{ty}" x2="{LEFT + plot_w}" y2="{ty}" '
        f'stroke="{COLORS["threshold"]}" stroke-dasharray="2,4"/>'
    )

    parts += _polylines(ids, f1["ref"], to_x, to_f1, COLORS["f1_ref"], True, "f1-ref")
    parts += _polylines(ids, f1["retrain"], to_x, to_f1, COLORS["f1_retrain"], False, "f1-retrain")
    parts += _polylines(ids, strength["ref"], to_x, to_strength, COLORS["strength_ref"], True, "strength-ref")
    parts += _polylines(ids, strength["retrain"], to_x, to_strength, COLORS["strength_retrain"], False, "strength-retrain")

    legend = [
        ("F1 (retraining)", COLORS["f1_retrain"], False),
        ("F1 (no retraining)", COLORS["f1_ref"], True),
        ("strength (retraining)", COLORS["strength_retrain"], False),
        ("strength (no retraining)", COLORS["strength_ref"], True),
    ]
    ly = HEIGHT - 18
    for n, (label, color, dashed) in enumerate(legend):
        lx = LEFT + n * 200
        dash = ' stroke-dasharray="5,3"' if dashed else ""
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>')
        parts.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
