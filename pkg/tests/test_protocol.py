import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from galtkit.protocol import (
    SPLITS,
    TASKS,
    MissingChannelError,
    ObjectRegion,
    RegionSpec,
    SamplingError,
    SceneStateTrack,
    SuccessCriterion,
    TaskSpec,
    check_success,
    get_task,
    load_task_registry,
    min_pairwise_distance,
    prompt_target,
    region_contains,
    sample_split,
)


@pytest.mark.parametrize(
    "name,axis,cmp,thr",
    [
        ("conditional-pick", "z", ">", 1.2),
        ("wait-then-act", "z", ">", 1.2),
        ("clutter-pick-cube", "z", ">", 1.2),
        ("clutter-pick-lift", "z", ">", 1.2),
        ("multi-shelf-scan", "x", "<", 0.46),
        ("peeking-box", "z", ">", 1.25),
        ("occluded-reach", "z", ">", 1.25),
        ("blocked-clutter-pick-cube", "z", ">", 1.2),
    ],
)
def test_builtin_thresholds(name, axis, cmp, thr):
    s = get_task(name).success
    assert (s.axis, s.comparator, s.threshold, s.ee_speed_max) == (axis, cmp, thr, 1.0)


def test_registry_shape():
    assert len(TASKS) == 8
    assert sum(t.suite == "head" for t in TASKS.values()) == 5
    assert TASKS["wait-then-act"].success.requires_light
    assert len(TASKS["clutter-pick-lift"].prompts) == 15 == len(TASKS["multi-shelf-scan"].prompts)
    lift = TASKS["clutter-pick-lift"]
    assert "tuna" in lift.prompts[7] and prompt_target(lift, 7) == "tuna_can"
    with pytest.raises(KeyError):
        get_task("no-such-task")


def test_clutter_region_sizes():
    idr, ood = TASKS["clutter-pick-cube"].id_region, TASKS["clutter-pick-cube"].ood_region
    o = idr.objects[0]
    assert o.x[1] - o.x[0] == pytest.approx(0.10) and o.y[1] - o.y[0] == pytest.approx(0.50)
    o = ood.objects[0]
    assert o.x[1] - o.x[0] == pytest.approx(0.20) and o.y[1] - o.y[0] == pytest.approx(0.70)
    assert (idr.min_separation, ood.min_separation) == (0.10, 0.05)
    assert TASKS["wait-then-act"].id_region.scalars["cue_delay_s"] == (2.0, 5.0)
    assert TASKS["wait-then-act"].ood_region.scalars["cue_delay_s"] == (2.0, 8.0)


@pytest.mark.parametrize("name", sorted(TASKS))
def test_id_within_ood(name):
    t = TASKS[name]
    assert t.id_region.within(t.ood_region)


def test_region_invariants():
    with pytest.raises(ValueError):
        ObjectRegion("a", (1.0, 0.0), (0.0, 0.0))
    with pytest.raises(ValueError):
        RegionSpec((ObjectRegion("a", (0, 1), (0, 1)),), min_separation=-0.1)
    with pytest.raises(ValueError):
        RegionSpec((ObjectRegion("a", (0, 1), (0, 1)), ObjectRegion("a", (0, 1), (0, 1))))


@pytest.mark.parametrize("seed", range(20))
def test_clutter_id_example(seed):
    t = TASKS["clutter-pick-cube"]
    s = sample_split(t, "id", seed)
    assert len(s.object_poses) == 5
    assert region_contains(t.id_region, s)
    assert min_pairwise_distance(t.id_region, s.object_poses) >= 0.10
    assert s.reset_perturbation is None


def test_zero_width_region():
    region = RegionSpec((ObjectRegion("a", (0.4, 0.4), (-0.1, -0.1), (7.0, 7.0)),))
    t = TaskSpec("pin", "head", region, region, SuccessCriterion("z", ">", 1.2))
    assert sample_split(t, "id", 3).object_poses["a"] == (0.4, -0.1, 7.0)


def test_reset_perturbation_only_for_init_pose():
    t = TASKS["occluded-reach"]
    for split in SPLITS:
        s = sample_split(t, split, 9)
        assert (s.reset_perturbation is not None) == (split == "ood-init-pose")
    with pytest.raises(ValueError):
        sample_split(t, "ood-texture", 0)


def test_init_pose_sigma():
    t = TASKS["peeking-box"]
    rs = [sample_split(t, "ood-init-pose", s).reset_perturbation for s in range(10_000)]
    yaw = np.array([r.neck_yaw_delta for r in rs])
    pitch = np.array([r.neck_pitch_delta for r in rs])
    ee = np.array([r.ee_left_delta + r.ee_right_delta for r in rs])
    assert abs(yaw.std() / 0.175 - 1) < 0.05 and abs(pitch.std() / 0.175 - 1) < 0.05
    assert np.all(np.abs(ee.std(axis=0) / 0.10 - 1) < 0.05)


@given(st.sampled_from(sorted(TASKS)), st.sampled_from(SPLITS), st.integers(0, 2**63 - 1))
def test_sampling_deterministic_and_inside(name, split, seed):
    t = TASKS[name]
    a, b = sample_split(t, split, seed), sample_split(t, split, seed)
    assert a == b
    assert region_contains(t.region(split), a)


def test_sampling_budget_exhausted():
    crowded = RegionSpec(tuple(ObjectRegion(f"o{i}", (0, 0.01), (0, 0.01)) for i in range(3)), min_separation=0.5)
    t = TaskSpec("crowded", "head", crowded, crowded, SuccessCriterion("z", ">", 1.2))
    with pytest.raises(SamplingError) as e:
        sample_split(t, "id", 0)
    assert e.value.attempts == 1000


def test_peeking_object_stays_in_box_frame():
    t = TASKS["peeking-box"]
    for seed in range(200):
        s = sample_split(t, "ood-spatial", seed)
        assert region_contains(t.ood_region, s)
        assert s.choices["open_side"] in ("left", "right")


def test_registry_override(tmp_path):
    p = tmp_path / "tasks.json"
    extra = TASKS["occluded-reach"].to_dict()
    extra["name"] = "ignored"
    p.write_text(json.dumps({"tasks": {
        "peeking-box": {"success": {"threshold": 1.3}},
        "occluded-reach-2": extra,
    }}))
    reg = load_task_registry(p)
    assert reg["peeking-box"].success.threshold == 1.3
    assert reg["peeking-box"].id_region == TASKS["peeking-box"].id_region
    assert reg["occluded-reach-2"].name == "occluded-reach-2"
    assert TASKS["peeking-box"].success.threshold == 1.25


def test_task_dict_round_trip():
    for t in TASKS.values():
        assert TaskSpec.from_dict(json.loads(json.dumps(t.to_dict()))) == t


# ---- success checking ----

RATE = 20.0
CUBE = TASKS["clutter-pick-cube"]


def _track(z, ee=None, light=None, target="target"):
    z = np.asarray(z, dtype=float)
    pos = np.zeros((len(z), 3))
    pos[:, 0] = 0.45
    pos[:, 2] = z
    ee = np.zeros((len(z), 2)) if ee is None else np.asarray(ee, dtype=float)
    return SceneStateTrack(RATE, {target: pos}, ee, light)


def test_lift_and_hold_succeeds():
    z = np.concatenate([np.full(40, 1.05), np.linspace(1.05, 1.3, 20), np.full(40, 1.3)])
    r = check_success(CUBE, _track(z))
    assert r.success
    first = int(np.flatnonzero(z > 1.2)[0])
    assert r.first_frame == first and r.first_time_s == first / RATE


def test_sub_threshold_fails():
    assert not check_success(CUBE, _track(np.full(200, 1.19))).success


def test_ballistic_crossing_gated_by_velocity():
    z = np.full(120, 1.05)
    ee = np.zeros((120, 2))
    z[30] = 1.25  # one frame above threshold mid-throw
    ee[25:35, 0] = 2.0
    assert not check_success(CUBE, _track(z, ee)).success
    z[80:] = 1.25  # settled on the shelf
    ee[70:80, 0] = 2.0
    r = check_success(CUBE, _track(z, ee))
    assert r.success and r.first_frame == 80


def test_hold_window_length():
    z = np.full(100, 1.0)
    z[50:54] = 1.3  # 4 frames < 5-frame hold at 20 Hz
    assert not check_success(CUBE, _track(z)).success
    z[54] = 1.3
    assert check_success(CUBE, _track(z)).first_frame == 50


def test_x_comparator():
    pos = np.zeros((30, 3))
    pos[:, 0] = np.linspace(0.6, 0.4, 30)
    r = check_success(TASKS["multi-shelf-scan"], SceneStateTrack(RATE, {"target": pos}, np.zeros((30, 2))))
    assert r.success and pos[r.first_frame, 0] < 0.46 <= pos[r.first_frame - 1, 0]


def test_light_gate():
    task = TASKS["wait-then-act"]
    z = np.full(100, 1.3)
    light = np.zeros(100, dtype=bool)
    assert not check_success(task, _track(z, light=light)).success
    light[60:] = True
    assert check_success(task, _track(z, light=light)).first_frame == 60
    assert check_success(task, _track(z)).first_frame == 0  # no light channel logged


def test_missing_channel_and_short_track():
    with pytest.raises(MissingChannelError):
        check_success(CUBE, _track(np.full(20, 1.3), target="cube_typo"))
    with pytest.raises(ValueError):
        check_success(CUBE, _track(np.full(3, 1.3)))
    with pytest.raises(ValueError):
        SceneStateTrack(0.0, {}, np.zeros((3, 2)))


@given(st.integers(0, 2**32 - 1), st.integers(5, 120), st.floats(1.0, 1.4), st.floats(0.0, 0.3))
def test_success_monotone_in_threshold(seed, n, thr, bump):
    rng = np.random.default_rng(seed)
    z = rng.normal(1.2, 0.08, n)
    ee = rng.uniform(0, 1.5, (n, 2))
    track = _track(z, ee)
    lo = check_success(SuccessCriterion("z", ">", thr), track)
    hi = check_success(SuccessCriterion("z", ">", thr + bump), track)
    if hi.success:
        assert lo.success and lo.first_frame <= hi.first_frame
