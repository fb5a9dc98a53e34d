"""End-to-end acceptance checks, one test per criterion.

Each test records a ``PASS``/``FAIL criterion N: ...`` line before asserting;
the lines are repeated in the terminal summary (see conftest.py). Run with
``pytest tests/test_acceptance.py -v``.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from galtkit import report as rep
from galtkit.detector import GaltConfig, detect_galt_batch
from galtkit.protocol import (
    TASKS,
    SceneStateTrack,
    SuccessCriterion,
    check_success,
    min_pairwise_distance,
    region_contains,
    sample_split,
)
from galtkit.stats import histogram, suite_mean, summarize_galt, wilson_ci
from galtkit.synthetic import CorpusDistribution, generate_corpus
from galtkit.trajectory import downsample_stride

LINES: list[str] = []
FRAME = 1 / 60


def record(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(800, CorpusDistribution(galt_range_s=(0.0, 3.0), rate_hz=60.0), seed=0)


@pytest.fixture(scope="module")
def native(corpus):
    t0 = time.perf_counter()
    outs = detect_galt_batch([(e.episode_id, e.trajectory) for e in corpus])
    return outs, time.perf_counter() - t0


def test_criterion_1_wilson_golden_vectors():
    table = json.loads((Path(__file__).parent / "data" / "multitask_ci_table.json").read_text())
    n = table["trials_per_cell"]

    def shown(c):
        return f"{c['pct']:.1f} [{c['lo']:.1f}, {c['hi']:.1f}]"

    cells = [c for c in table["cells"] if c["task"] != "suite-mean"]
    hits = sum(wilson_ci(round(c["pct"] * n / 100), n).display() == shown(c) for c in cells)
    groups: dict = {}
    for c in cells:
        groups.setdefault((c["suite"], c["robot"], c["split"], c["camera"]), []).append((round(c["pct"] * n / 100), n))
    means = [c for c in table["cells"] if c["task"] == "suite-mean"]
    mean_hits = sum(
        suite_mean(groups[(c["suite"], c["robot"], c["split"], c["camera"])]).display() == shown(c) for c in means
    )
    named = (
        wilson_ci(84, 96).display() == "87.5 [79.4, 92.7]"
        and wilson_ci(0, 96).display() == "0.0 [0.0, 3.8]"
        and wilson_ci(53, 96).display() == "55.2 [45.3, 64.8]"
        and suite_mean([(62, 96), (84, 96), (56, 96)]).display() == "70.1 [64.6, 75.1]"
    )
    ok = hits == len(cells) >= 20 and mean_hits == len(means) and named
    record(1, ok, f"{hits}/{len(cells)} task cells, {mean_hits}/{len(means)} suite means, named examples {named}")


def test_criterion_2_detector_exactness(corpus, native):
    outs, secs = native
    detected = sum(o.ok for o in outs)
    err = max(abs(o.galt_s - e.truth.galt_s) for o, e in zip(outs, corpus) if o.ok)
    span = (min(e.truth.galt_s for e in corpus), max(e.truth.galt_s for e in corpus))
    ok = detected == 800 and err <= FRAME + 1e-12 and secs < 10
    record(
        2,
        ok,
        f"detection {detected}/800, max |error| {err * 1000:.2f} ms (limit {FRAME * 1000:.2f}), "
        f"truth span [{span[0]:.2f}, {span[1]:.2f}] s, detection time {secs:.1f} s",
    )


def test_criterion_3_stride_invariance(corpus, native):
    outs, _ = native
    coarse = detect_galt_batch([(e.episode_id, downsample_stride(e.trajectory, 3)) for e in corpus])
    s60, s20 = summarize_galt(outs), summarize_galt(coarse)
    diff = abs(s60.median_s - s20.median_s)
    dropped = [c.skip_code for o, c in zip(outs, coarse) if o.ok and not c.ok]
    bad_codes = [c for c in dropped if c not in ("no_hand_onset", "no_fixation")]
    # a kept episode must still measure its own lead, up to the coarse frame period
    wrong = sum(abs(o.galt_s - c.galt_s) > 3 * FRAME + 1e-9 for o, c in zip(outs, coarse) if o.ok and c.ok)
    ok = diff <= 0.020 and not bad_codes and wrong == 0
    record(
        3,
        ok,
        f"median 60 Hz {s60.median_s:.4f} s vs 20 Hz {s20.median_s:.4f} s, |diff| {diff * 1000:.1f} ms (limit 20), "
        f"detection 20 Hz {100 * s20.detection_rate:.1f}%, dropped {len(dropped)} ({sorted(set(dropped))}), "
        f"off-by-more-than-stride {wrong}",
    )


CODES = ("no_gripper_event", "no_hand_onset", "no_fixation", "outlier_low", "outlier_high", "ambiguous_arms")


def test_criterion_4_skip_code_soundness():
    results = {}
    for code in CODES:
        # outlier_low cannot occur with the default 0.5 s forward slack; it needs a wider one
        cfg = GaltConfig(forward_slack_s=1.0) if code == "outlier_low" else GaltConfig()
        eps = generate_corpus(200, CorpusDistribution(codes=(code,)), seed=4, cfg=cfg)
        outs = detect_galt_batch([(e.episode_id, e.trajectory) for e in eps], cfg)
        planted = sum(e.truth.code == code for e in eps)
        results[code] = (sum(o.skip_code == code for o in outs), planted)
    ok = all(hit == planted == 200 for hit, planted in results.values())
    detail = ", ".join(f"{c} {h}/200" for c, (h, _) in results.items())
    record(4, ok, detail + " (outlier_low run with forward_slack_s=1.0)")


def test_criterion_5_refinement():
    dist = CorpusDistribution(deceleration_tail_s=(0.3, 0.5))
    eps = generate_corpus(300, dist, seed=5)
    pairs = [(e.episode_id, e.trajectory) for e in eps]
    refined = detect_galt_batch(pairs)
    plain = detect_galt_batch(pairs, GaltConfig(arrival_margin_rad=0.0))

    def head(o):
        return next(d.t_head for d in o.per_arm if d.ok)

    ok_both = [(e, r, p) for e, r, p in zip(eps, refined, plain) if r.ok and p.ok]
    within = sum(abs(head(r) - e.truth.t_head) <= 1 for e, r, _ in ok_both)
    delayed = sum(head(p) > head(r) for _, r, p in ok_both)
    shift = np.median([(head(p) - head(r)) / 60 for _, r, p in ok_both])
    ok = len(ok_both) == len(eps) and within == delayed == len(eps)
    record(
        5,
        ok,
        f"t_head within 1 frame of analytic margin entry {within}/{len(eps)}, "
        f"r=0 strictly later {delayed}/{len(eps)} (median delay {shift * 1000:.0f} ms)",
    )


def test_criterion_6_split_sampler():
    n = 10_000
    outside = 0
    for task in TASKS.values():
        for split in ("id", "ood-spatial"):
            region = task.region(split)
            for seed in range(n):
                s = sample_split(task, split, seed)
                inside = region_contains(region, s)
                if region.min_separation:
                    inside &= min_pairwise_distance(region, s.object_poses) >= region.min_separation
                outside += not inside
    rs = [sample_split(TASKS["clutter-pick-cube"], "ood-init-pose", s).reset_perturbation for s in range(n)]
    ee_std = np.array([r.ee_left_delta + r.ee_right_delta for r in rs]).std(axis=0)
    neck_std = np.array([(r.neck_yaw_delta, r.neck_pitch_delta) for r in rs]).std(axis=0)
    ee_ok = bool(np.all(np.abs(ee_std / 0.10 - 1) <= 0.05))
    neck_ok = bool(np.all(np.abs(neck_std / 0.175 - 1) <= 0.05))
    ok = outside == 0 and ee_ok and neck_ok
    record(
        6,
        ok,
        f"{2 * len(TASKS) * n - outside}/{2 * len(TASKS) * n} id/ood-spatial samples inside with separation, "
        f"EE sigma {ee_std.min():.4f}-{ee_std.max():.4f} m, neck sigma {neck_std.min():.4f}-{neck_std.max():.4f} rad",
    )


def _track(z, ee):
    pos = np.zeros((len(z), 3))
    pos[:, 0] = 0.45
    pos[:, 2] = z
    return SceneStateTrack(20.0, {"target": pos}, ee)


def test_criterion_7_success_checker():
    cube = TASKS["clutter-pick-cube"]
    z = np.concatenate([np.full(40, 1.05), np.linspace(1.05, 1.3, 20), np.full(40, 1.3)])
    lift = check_success(cube, _track(z, np.zeros((100, 2)))).success

    below = not check_success(cube, _track(np.full(100, 1.19), np.zeros((100, 2)))).success

    z = np.full(120, 1.05)
    ee = np.zeros((120, 2))
    z[30], ee[25:35, 0] = 1.25, 2.0
    thrown = check_success(cube, _track(z, ee)).success
    z[80:], ee[70:80, 0] = 1.25, 2.0
    settled = check_success(cube, _track(z, ee))
    ballistic = not thrown and settled.success and settled.first_frame == 80

    rng = np.random.default_rng(7)
    violations = 0
    for _ in range(1000):
        n = int(rng.integers(5, 200))
        track = _track(rng.normal(1.2, 0.1, n), rng.uniform(0, 1.5, (n, 2)))
        t1 = float(rng.uniform(1.0, 1.4))
        t2 = t1 + float(rng.uniform(0, 0.3))
        lo = check_success(SuccessCriterion("z", ">", t1), track)
        hi = check_success(SuccessCriterion("z", ">", t2), track)
        violations += hi.success and not lo.success
    ok = lift and below and ballistic and violations == 0
    record(
        7,
        ok,
        f"lift-and-hold {lift}, sub-threshold fails {below}, ballistic gated then settled at frame "
        f"{settled.first_frame} {ballistic}, monotonicity violations {violations}/1000",
    )


def test_criterion_8_report_contract():
    rng = np.random.default_rng(8)
    broken = 0
    for _ in range(1000):
        n = int(rng.integers(0, 300))
        v = rng.normal(1.5, 1.5, n)
        v[rng.random(n) < 0.05] = np.nan
        lo = float(rng.uniform(-2, 2))
        h = histogram(v, lo, lo + float(rng.uniform(0.1, 5)), int(rng.integers(1, 40)))
        broken += sum(h.counts) + h.n_dropped != n

    eps = generate_corpus(60, CorpusDistribution(codes=("ok", "ok", "no_fixation")), seed=8)
    pairs = [(e.episode_id, e.trajectory) for e in eps]

    def dump(workers):
        outs = detect_galt_batch(pairs, workers=workers)
        return rep.dumps(rep.galt_report(outs, GaltConfig(), rep.make_filters()))

    texts = {dump(1), dump(1), dump(2), dump(4)}
    ok = broken == 0 and len(texts) == 1
    record(8, ok, f"conservation failures {broken}/1000, distinct report bytes over runs/workers {len(texts)}")


def test_criterion_9_not_reproducible_offline():
    line = (
        "SKIP criterion 9: policy success rates and the real-dataset GALT medians/detection rates need "
        "simulator rollouts or the released datasets; no offline check"
    )
    LINES.append(line)
    print(line)
    pytest.skip(line)

