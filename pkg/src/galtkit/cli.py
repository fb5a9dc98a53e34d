"""Command-line entry point: ``galtkit <subcommand> ...``.

Failures print one JSON error record on stderr and exit nonzero (2 for usage
errors, 1 otherwise). Per-episode failures are recorded as outcomes and
never abort a batch.
"""

from __future__ import annotations

import argparse
import collections
import csv
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

from galtkit import report as rep
from galtkit.config import load_config
from galtkit.detector import GaltConfig, GaltOutcome, detect_galt_batch
from galtkit.io import EpisodeFile, episode_digest, find_episodes, read_episode, write_episode
from galtkit.protocol import SPLITS, get_task, load_task_registry, region_contains, sample_split
from galtkit.stats import histogram, median_delta, suite_mean, summarize_galt, wilson_ci
from galtkit.synthetic import PLANTABLE, CorpusDistribution, NoiseSpec, generate_corpus
from galtkit.trajectory import ActionTrajectory, downsample_stride


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise argparse.ArgumentTypeError(f"need finite lo < hi, got {text!r}")
    return lo, hi


def parse_seeds(text: str) -> list[int]:
    """``a..b`` (inclusive), ``a,b,c`` or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..")
            a, b = int(a), int(b)
            if b < a:
                raise ValueError
            return list(range(a, b + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}; use a..b or a,b,c") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        v = 0
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="detector config file (default: $GALT_CONFIG, else built-in defaults)")
    common.add_argument("--out", type=Path, help="write the report into this directory instead of stdout")
    common.add_argument("--format", choices=("json", "md", "svg"), default="json")
    common.add_argument("--workers", type=_positive_int, default=1)
    common.add_argument(
        "--rate-stride", type=_positive_int, default=None, metavar="K", help="frame stride (default 1; validate: 3)"
    )
    common.add_argument("--hist-range", type=parse_range, default=rep.DEFAULT_HIST_RANGE, metavar="LO:HI")
    common.add_argument("--hist-bins", type=_positive_int, default=rep.DEFAULT_HIST_BINS, metavar="N")
    common.add_argument(
        "--galt-filter",
        type=parse_range,
        default=rep.DEFAULT_GALT_FILTER,
        metavar="LO:HI",
        help="report-level value filter (write negative bounds as --galt-filter=-0.5:3.0)",
    )
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="galtkit", description="Gaze-action lead time tools.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("galt", parents=[common], help="detect GALT over episode directories")
    g.add_argument("paths", nargs="+", type=Path)

    s = sub.add_parser("stats", parents=[common], help="Wilson tables and suite means from success counts")
    s.add_argument("cells", type=Path, help="CSV with columns suite,task,condition,successes,trials")
    s.add_argument("--alpha", type=float, default=0.05)

    c = sub.add_parser("compare", parents=[common], help="policy vs reference GALT medians and histograms")
    c.add_argument("policy", type=Path, help="galt report JSON or episode directory")
    c.add_argument("reference", type=Path, help="galt report JSON or episode directory")

    sp = sub.add_parser("splits", parents=[common], help="sample evaluation splits")
    sp.add_argument("task")
    sp.add_argument("split", choices=SPLITS)
    sp.add_argument("--seeds", type=parse_seeds, default=[0], metavar="A..B")
    sp.add_argument("--registry", type=Path, help="JSON task registry overriding the built-in tasks")

    y = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus with planted truth")
    y.add_argument("--n", type=_positive_int, default=800)
    y.add_argument("--codes", default="ok", help=f"comma-separated planted codes from {','.join(PLANTABLE)}")
    y.add_argument("--rate-hz", type=float, default=60.0)
    y.add_argument("--pos-sigma-m", type=float, default=0.0)
    y.add_argument("--neck-sigma-deg", type=float, default=0.0)
    y.add_argument("--encoding", choices=("csv", "bin"), default="csv")

    v = sub.add_parser("validate", parents=[common], help="native-rate vs strided detection, side by side")
    v.add_argument("path", nargs="?", type=Path, help="episode directory (omit with --synthetic)")
    v.add_argument("--synthetic", type=_positive_int, metavar="N", help="validate on an N-episode noiseless corpus")
    return p


# ---- helpers ----


def _filters(args) -> dict:
    return rep.make_filters(tuple(args.galt_filter), tuple(args.hist_range), args.hist_bins, args.rate_stride)


def _array_digest(traj: ActionTrajectory) -> str:
    h = hashlib.sha256(repr(traj.rate_hz).encode())
    h.update(traj.data.astype("<f8").tobytes())
    return h.hexdigest()


def _load_dir(paths: Sequence[Path]):
    """(episode_id, trajectory or error, task, digest) for every episode found."""
    rows = []
    for root in paths:
        for d in find_episodes(root):
            try:
                ep = read_episode(d)
                rows.append((ep.meta.episode_id, ep.trajectory(), ep.meta.task, episode_digest(d)))
            except Exception as e:
                rows.append((d.name, f"{type(e).__name__}: {e}", "", episode_digest(d)))
    ids = [r[0] for r in rows]
    dupes = sorted(i for i, n in collections.Counter(ids).items() if n > 1)
    if dupes:
        raise ValueError(f"duplicate episode ids: {dupes[:5]}")
    return rows


def _detect(rows, cfg: GaltConfig, stride: int, workers: int) -> list[GaltOutcome]:
    good = [(eid, downsample_stride(t, stride)) for eid, t, _, _ in rows if not isinstance(t, str)]
    out = detect_galt_batch(good, cfg, workers)
    out += [GaltOutcome(eid, None, None, "invalid_input", (), t) for eid, t, _, _ in rows if isinstance(t, str)]
    return out


def _galt_report_for(rows, cfg: GaltConfig, args) -> dict:
    outcomes = _detect(rows, cfg, args.rate_stride, args.workers)
    return rep.galt_report(
        outcomes,
        cfg,
        _filters(args),
        tasks={eid: task for eid, _, task, _ in rows},
        digests={eid: dig for eid, _, _, dig in rows},
    )


def _load_galt_source(path: Path, cfg: GaltConfig, args) -> dict:
    if path.is_file():
        data = json.loads(path.read_text(encoding="utf-8"))
        if data.get("kind") != "galt":
            raise ValueError(f"{path} is not a galt report")
        return data
    return _galt_report_for(_load_dir([path]), cfg, args)


def _emit(report: dict, args, svg=None) -> None:
    if args.format == "json":
        text, name = rep.dumps(report), "report.json"
    elif args.format == "md":
        text, name = rep.render_markdown(report), "report.md"
    else:
        if svg is None:
            raise ValueError(f"no SVG view for '{report['kind']}'")
        text, name = svg(), "histogram.svg"
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / name).write_text(text, encoding="utf-8")


# ---- subcommands ----


def cmd_galt(args, cfg: GaltConfig) -> None:
    r = _galt_report_for(_load_dir(args.paths), cfg, args)
    _emit(r, args, lambda: rep.render_svg([("episodes", rep.histogram_from_dict(r["histogram"]), False)], "GALT"))


def cmd_stats(args, cfg: GaltConfig) -> None:
    cells = []
    with open(args.cells, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"suite", "task", "successes", "trials"}
        if not need <= set(reader.fieldnames or ()):
            raise ValueError(f"{args.cells}: need columns {sorted(need)}, got {reader.fieldnames}")
        for line, row in enumerate(reader, start=2):
            try:
                k, n = int(row["successes"]), int(row["trials"])
                ci = wilson_ci(k, n, args.alpha)
            except ValueError as e:
                raise ValueError(f"{args.cells}:{line}: {e}") from e
            cells.append(
                {"suite": row["suite"], "task": row["task"], "condition": row.get("condition") or "", "ci": ci.to_dict()}
            )
    groups: dict[tuple[str, str], list[dict]] = {}
    for c in cells:
        groups.setdefault((c["suite"], c["condition"]), []).append(c)
    means = []
    for (suite, cond), cs in sorted(groups.items()):
        pooled = suite_mean([(c["ci"]["successes"], c["ci"]["trials"]) for c in cs], args.alpha)
        means.append({"suite": suite, "condition": cond, "n_tasks": len(cs), "ci": pooled.to_dict()})
    r = rep.header("stats", None, None)
    r.update(alpha=args.alpha, cells=cells, suite_means=means)
    _emit(r, args)


def cmd_compare(args, cfg: GaltConfig) -> None:
    pol = _load_galt_source(args.policy, cfg, args)
    ref = _load_galt_source(args.reference, cfg, args)
    ps, rs = rep.summary_from_dict(pol["summary"]), rep.summary_from_dict(ref["summary"])

    def delta(a, b):
        if a.n_valid == 0 or b.n_valid == 0:
            return None
        return median_delta(a, b).to_dict()

    per_task = {}
    for task in sorted(set(pol["per_task"]) & set(ref["per_task"])):
        per_task[task] = delta(rep.summary_from_dict(pol["per_task"][task]), rep.summary_from_dict(ref["per_task"][task]))
    r = rep.header("compare", cfg, _filters(args))
    lo, hi = args.hist_range
    hp = histogram(ps.values, lo, hi, args.hist_bins)
    hr = histogram(rs.values, lo, hi, args.hist_bins)
    r.update(
        inputs={"policy": pol["inputs"], "reference": ref["inputs"]},
        policy=ps.to_dict(),
        reference=rs.to_dict(),
        pooled=delta(ps, rs),
        per_task=per_task,
        histograms={"policy": hp.to_dict(), "reference": hr.to_dict()},
    )
    _emit(r, args, lambda: rep.render_svg([("policy", hp, False), ("reference", hr, True)], "GALT: policy vs reference"))


def cmd_splits(args, cfg: GaltConfig) -> None:
    registry = load_task_registry(args.registry) if args.registry else None
    task = get_task(args.task, registry)
    samples = []
    for seed in args.seeds:
        s = sample_split(task, args.split, seed)
        d = s.to_dict()
        d["inside_region"] = region_contains(task.region(args.split), s)
        samples.append(d)
    r = rep.header("splits", None, None)
    r.update(task=task.name, split=args.split, seeds=list(args.seeds), samples=samples)
    _emit(r, args)


def cmd_synth(args, cfg: GaltConfig) -> None:
    if args.out is None:
        raise ValueError("synth needs --out")
    codes = tuple(c.strip() for c in args.codes.split(",") if c.strip())
    dist = CorpusDistribution(
        rate_hz=args.rate_hz,
        codes=codes,
        noise=NoiseSpec(args.pos_sigma_m, math.radians(args.neck_sigma_deg)),
    )
    corpus = generate_corpus(args.n, dist, args.seed, cfg)
    counts: dict[str, int] = {}
    for ep in corpus:
        f = EpisodeFile.from_trajectory(
            ep.episode_id, ep.trajectory, task="synthetic", robot="synthetic", extra={"truth": ep.truth.to_dict()}
        )
        write_episode(f, args.out / ep.episode_id, args.encoding)
        counts[ep.truth.code] = counts.get(ep.truth.code, 0) + 1
    r = rep.header("synth", cfg, None)
    r.update(n=args.n, seed=args.seed, codes=list(codes), planted=dict(sorted(counts.items())), out=str(args.out))
    sys.stdout.write(rep.dumps(r))


def cmd_validate(args, cfg: GaltConfig) -> None:
    if (args.path is None) == (args.synthetic is None):
        raise ValueError("validate needs exactly one of PATH or --synthetic N")
    if args.path is not None:
        rows = _load_dir([args.path])
    else:
        corpus = generate_corpus(args.synthetic, CorpusDistribution(), args.seed, cfg)
        rows = [(e.episode_id, e.trajectory, "synthetic", _array_digest(e.trajectory)) for e in corpus]
    filters = _filters(args)
    native = _detect(rows, cfg, 1, args.workers)
    strided = _detect(rows, cfg, args.rate_stride, args.workers)
    out_rows, summaries = [], []
    for stride, outs in ((1, native), (args.rate_stride, strided)):
        good = [t for _, t, _, _ in rows if not isinstance(t, str)]
        rate = good[0].rate_hz / stride if good else None
        block = rep.galt_block(outs, filters)
        summaries.append(summarize_galt(outs, tuple(filters["galt_filter"])))
        out_rows.append({"stride": stride, "rate_hz": rate, **block})
    by_id = {o.episode_id: o for o in strided}
    dropped = {o.episode_id: by_id[o.episode_id].skip_code for o in native if o.ok and not by_id[o.episode_id].ok}
    md = median_delta(summaries[0], summaries[1]).to_dict() if all(s.n_valid for s in summaries) else None
    r = rep.header("validate", cfg, filters)
    r.update(
        inputs=dict(sorted((eid, dig) for eid, _, _, dig in rows)),
        rows=out_rows,
        median_delta=md,
        dropped_at_stride=dict(sorted(dropped.items())),
    )
    series = [(f"{row['rate_hz']:g} Hz", rep.histogram_from_dict(row["histogram"]), i == 0) for i, row in enumerate(out_rows)]
    _emit(r, args, lambda: rep.render_svg(series, "GALT: native vs strided"))


DEFAULT_STRIDE = {"validate": 3}

COMMANDS = {
    "galt": cmd_galt,
    "stats": cmd_stats,
    "compare": cmd_compare,
    "splits": cmd_splits,
    "synth": cmd_synth,
    "validate": cmd_validate,
}


def _error_record(kind: str, message: str, **extra: Any) -> str:
    return json.dumps({"error": {"type": kind, "message": message, **extra}}, sort_keys=True)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(_error_record("usage", str(e)), file=sys.stderr)
        return 2
    # parents share argument objects, so per-command defaults are resolved here
    if args.rate_stride is None:
        args.rate_stride = DEFAULT_STRIDE.get(args.command, 1)
    try:
        cfg = load_config(args.config)
        COMMANDS[args.command](args, cfg)
    except Exception as e:
        print(_error_record(type(e).__name__, str(e), command=args.command), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
