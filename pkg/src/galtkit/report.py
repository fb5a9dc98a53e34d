"""Run reports: canonical JSON plus Markdown and SVG views.

JSON is the source of truth. Every number in it is produced by a library
function and serialized at full precision; only the Markdown view rounds.
"""

from __future__ import annotations

import collections
import json
from typing import Any, Mapping, Sequence

from galtkit import __version__
from galtkit.detector import GaltConfig, GaltOutcome, sort_outcomes
from galtkit.stats import GaltSummary, Histogram, histogram, summarize_galt, wilson_ci

TOOL_NAME = "galtkit"
DEFAULT_GALT_FILTER = (-0.5, 3.0)
DEFAULT_HIST_RANGE = (-0.5, 3.5)
DEFAULT_HIST_BINS = 20


def dumps(report: Mapping[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def header(kind: str, cfg: GaltConfig | None, filters: Mapping[str, Any] | None) -> dict:
    d: dict[str, Any] = {"kind": kind, "tool": {"name": TOOL_NAME, "version": __version__}}
    if cfg is not None:
        d["config"] = cfg.to_dict()
    if filters is not None:
        d["filters"] = dict(filters)
    return d


def make_filters(
    galt_filter: tuple[float, float] = DEFAULT_GALT_FILTER,
    hist_range: tuple[float, float] = DEFAULT_HIST_RANGE,
    hist_bins: int = DEFAULT_HIST_BINS,
    rate_stride: int = 1,
) -> dict:
    return {
        "galt_filter": list(galt_filter),
        "hist_range": list(hist_range),
        "hist_bins": hist_bins,
        "rate_stride": rate_stride,
    }


def galt_block(outcomes: Sequence[GaltOutcome], filters: Mapping[str, Any]) -> dict:
    """Summary, detection CI, skip counts and histogram for one batch."""
    summary = summarize_galt(outcomes, tuple(filters["galt_filter"]))
    lo, hi = filters["hist_range"]
    hist = histogram(summary.values, lo, hi, filters["hist_bins"])
    skips = collections.Counter(o.skip_code or "ok" for o in outcomes)
    block = {
        "summary": summary.to_dict(),
        "histogram": hist.to_dict(),
        "skip_counts": dict(sorted(skips.items())),
        "detection_ci": wilson_ci(summary.n_valid, summary.n_total).to_dict() if summary.n_total else None,
    }
    return block


def galt_report(
    outcomes: Sequence[GaltOutcome],
    cfg: GaltConfig,
    filters: Mapping[str, Any],
    tasks: Mapping[str, str] | None = None,
    digests: Mapping[str, str] | None = None,
) -> dict:
    outcomes = sort_outcomes(outcomes)
    tasks = dict(tasks or {})
    report = header("galt", cfg, filters)
    report["inputs"] = dict(sorted((digests or {}).items()))
    report["tasks"] = dict(sorted(tasks.items()))
    report["outcomes"] = [o.to_dict() for o in outcomes]
    report.update(galt_block(outcomes, filters))
    by_task: dict[str, list[GaltOutcome]] = collections.defaultdict(list)
    for o in outcomes:
        by_task[tasks.get(o.episode_id, "")].append(o)
    report["per_task"] = {
        t: summarize_galt(v, tuple(filters["galt_filter"])).to_dict() for t, v in sorted(by_task.items())
    }
    return report


def summary_from_dict(d: Mapping[str, Any]) -> GaltSummary:
    return GaltSummary(
        n_valid=d["n_valid"],
        n_total=d["n_total"],
        detection_rate=d["detection_rate"],
        mean_s=d["mean_s"],
        median_s=d["median_s"],
        values=tuple(d["values"]),
    )


def histogram_from_dict(d: Mapping[str, Any]) -> Histogram:
    return Histogram(d["lo"], d["hi"], d["n_bins"], tuple(d["counts"]), d["n_dropped"])


# ---- Markdown ----


def _pct(x: float | None) -> str:
    return "n/a" if x is None else f"{100 * x:.1f}"


def _sec(x: float | None) -> str:
    return "n/a" if x is None else f"{x:.2f}"


def _ci(d: Mapping[str, Any] | None) -> str:
    if d is None:
        return "n/a"
    return f"{100 * d['point']:.1f} [{100 * d['lo']:.1f}, {100 * d['hi']:.1f}]"


def _table(cols: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(cols) + " |", "|" + "|".join("---" for _ in cols) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines)


def _md_galt(r: Mapping[str, Any]) -> str:
    s = r["summary"]
    out = ["# GALT run", ""]
    out.append(
        _table(
            ["episodes", "valid", "detection % [95% CI]", "mean (s)", "median (s)"],
            [[str(s["n_total"]), str(s["n_valid"]), _ci(r["detection_ci"]), _sec(s["mean_s"]), _sec(s["median_s"])]],
        )
    )
    out += ["", "## Outcome codes", ""]
    out.append(_table(["code", "count"], [[k, str(v)] for k, v in r["skip_counts"].items()]))
    if len(r["per_task"]) > 1 or "" not in r["per_task"]:
        out += ["", "## Per task", ""]
        rows = [
            [t or "(none)", str(v["n_total"]), _pct(v["detection_rate"]), _sec(v["mean_s"]), _sec(v["median_s"])]
            for t, v in r["per_task"].items()
        ]
        out.append(_table(["task", "episodes", "detection %", "mean (s)", "median (s)"], rows))
    return "\n".join(out) + "\n"


def _md_validate(r: Mapping[str, Any]) -> str:
    rows = []
    for row in r["rows"]:
        s = row["summary"]
        rows.append(
            [
                f"{row['rate_hz']:g} Hz",
                str(s["n_total"]),
                str(s["n_valid"]),
                _ci(row["detection_ci"]),
                _sec(s["mean_s"]),
                _sec(s["median_s"]),
            ]
        )
    out = ["# Stride validation", ""]
    out.append(_table(["rate", "episodes", "valid", "detection % [95% CI]", "mean (s)", "median (s)"], rows))
    md = r["median_delta"]
    if md is not None:
        out += ["", f"|median difference| = {md['abs_delta_s'] * 1000:.1f} ms"]
    return "\n".join(out) + "\n"


def _md_compare(r: Mapping[str, Any]) -> str:
    rows = []
    for name, d in [("pooled", r["pooled"])] + sorted(r["per_task"].items()):
        if d is None:
            rows.append([name, "n/a", "n/a", "n/a", "n/a"])
            continue
        rel = "n/a" if d["rel_delta"] is None else f"{100 * d['rel_delta']:.1f}"
        rows.append([name, _sec(d["median_policy_s"]), _sec(d["median_ref_s"]), _sec(d["abs_delta_s"]), rel])
    out = ["# Policy vs reference GALT", ""]
    out.append(_table(["task", "policy median (s)", "reference median (s)", "abs delta (s)", "rel delta %"], rows))
    return "\n".join(out) + "\n"


def _md_stats(r: Mapping[str, Any]) -> str:
    rows = [
        [c["suite"], c["task"], c["condition"], f"{c['ci']['successes']}/{c['ci']['trials']}", _ci(c["ci"])]
        for c in r["cells"]
    ]
    out = ["# Success rates (95% Wilson CI)", ""]
    out.append(_table(["suite", "task", "condition", "k/n", "success %"], rows))
    if r["suite_means"]:
        out += ["", "## Suite means", ""]
        rows = [[m["suite"], m["condition"], str(m["n_tasks"]), _ci(m["ci"])] for m in r["suite_means"]]
        out.append(_table(["suite", "condition", "tasks", "success %"], rows))
    return "\n".join(out) + "\n"


def _md_splits(r: Mapping[str, Any]) -> str:
    rows = []
    for s in r["samples"]:
        poses = "; ".join(f"{k} ({v[0]:.3f}, {v[1]:.3f}, {v[2]:.1f})" for k, v in sorted(s["object_poses"].items()))
        rows.append([str(s["seed"]), poses])
    out = [f"# {r['task']} / {r['split']}", "", _table(["seed", "objects (x m, y m, yaw deg)"], rows)]
    return "\n".join(out) + "\n"


_MD = {"galt": _md_galt, "validate": _md_validate, "compare": _md_compare, "stats": _md_stats, "splits": _md_splits}


def render_markdown(report: Mapping[str, Any]) -> str:
    try:
        return _MD[report["kind"]](report)
    except KeyError as e:
        raise ValueError(f"no Markdown view for report kind {report.get('kind')!r}") from e


# ---- SVG ----

_COLORS = ("#1f77b4", "#444444", "#d62728", "#2ca02c")


def render_svg(series: Sequence[tuple[str, Histogram, bool]], title: str = "", width: int = 640, height: int = 360) -> str:
    """Overlaid step histograms, y = fraction of in-range values per bin.

    ``series`` items are (label, histogram, dashed); reference series are
    conventionally drawn dashed.
    """
    if not series:
        raise ValueError("nothing to plot")
    lo, hi, n_bins = series[0][1].lo, series[0][1].hi, series[0][1].n_bins
    for _, h, _ in series:
        if (h.lo, h.hi, h.n_bins) != (lo, hi, n_bins):
            raise ValueError("overlaid histograms must share bins")
    ml, mr, mt, mb = 50, 20, 30, 40
    pw, ph = width - ml - mr, height - mt - mb
    fracs = []
    for _, h, _ in series:
        tot = sum(h.counts)
        fracs.append([c / tot if tot else 0.0 for c in h.counts])
    ymax = max(max(f) for f in fracs) or 1.0

    def sx(v: float) -> float:
        return ml + (v - lo) / (hi - lo) * pw

    def sy(v: float) -> float:
        return mt + ph - v / ymax * ph

    el = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        el.append(f'<text x="{width / 2:.2f}" y="18" text-anchor="middle">{_esc(title)}</text>')
    el.append(f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>')
    el.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>')
    edges = series[0][1].edges
    step = max(1, n_bins // 8)
    for i in range(0, n_bins + 1, step):
        x = sx(float(edges[i]))
        el.append(f'<line x1="{x:.2f}" y1="{mt + ph}" x2="{x:.2f}" y2="{mt + ph + 4}" stroke="black"/>')
        el.append(f'<text x="{x:.2f}" y="{mt + ph + 16}" text-anchor="middle">{edges[i]:.1f}</text>')
    el.append(f'<text x="{ml + pw / 2:.2f}" y="{height - 6}" text-anchor="middle">GALT (s)</text>')
    el.append(f'<text x="{ml - 8}" y="{mt + 4}" text-anchor="end">{ymax:.2f}</text>')
    el.append(f'<text x="{ml - 8}" y="{mt + ph}" text-anchor="end">0</text>')
    if lo < 0 < hi:
        el.append(
            f'<line x1="{sx(0):.2f}" y1="{mt}" x2="{sx(0):.2f}" y2="{mt + ph}" stroke="#999999" stroke-width="0.5"/>'
        )
    for k, ((label, h, dashed), f) in enumerate(zip(series, fracs)):
        pts = [(sx(lo), sy(0))]
        for b, v in enumerate(f):
            pts += [(sx(float(edges[b])), sy(v)), (sx(float(edges[b + 1])), sy(v))]
        pts.append((sx(hi), sy(0)))
        path = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        color = _COLORS[k % len(_COLORS)]
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        el.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        ly = mt + 12 + 14 * k
        el.append(
            f'<line x1="{ml + pw - 120}" y1="{ly - 4}" x2="{ml + pw - 100}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"{dash}/>'
        )
        el.append(f'<text x="{ml + pw - 95}" y="{ly}">{_esc(label)} (n={sum(h.counts)})</text>')
    el.append("</svg>")
    return "\n".join(el) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
