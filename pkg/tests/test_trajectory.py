import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from galtkit.synthetic import ArmPlan, NeckPlan, PlantSpec, minjerk_rate, minjerk_speed_crossings, render
from galtkit.trajectory import (
    CANONICAL_LAYOUT,
    ActionLayout,
    ActionTrajectory,
    LayoutError,
    downsample_stride,
    ee_linear_speed,
    fix_constant_dims,
    gripper_events,
    gripper_sign_changes,
    neck_angular_speed,
)
from helpers import still_actions, traj

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


actions = st.integers(2, 40).flatmap(lambda t: arrays(np.float64, (t, 19), elements=finite))


def test_canonical_layout_indices():
    lay = CANONICAL_LAYOUT
    assert lay.left_ee_pos == (0, 1, 2) and lay.left_ee_quat == (3, 4, 5, 6)
    assert lay.right_ee_pos == (7, 8, 9) and lay.right_ee_quat == (10, 11, 12, 13)
    assert lay.head_joints == (14, 15, 16)
    assert (lay.left_gripper, lay.right_gripper, lay.total_dims) == (17, 18, 19)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"right_gripper": 17},  # overlaps left gripper
        {"total_dims": 18},  # index 18 out of range
        {"head_joints": ()},
        {"left_ee_pos": (0, 1)},
    ],
)
def test_bad_layouts_rejected(kwargs):
    with pytest.raises(LayoutError):
        ActionLayout(**kwargs)


def test_layout_dict_round_trip():
    lay = ActionLayout(total_dims=21, left_gripper=19, right_gripper=20)
    assert ActionLayout.from_dict(lay.to_dict()) == lay


def test_trajectory_validation():
    with pytest.raises(ValueError):
        ActionTrajectory(np.zeros((1, 19)), 60)
    with pytest.raises(ValueError):
        ActionTrajectory(np.zeros((5, 18)), 60)
    with pytest.raises(ValueError):
        ActionTrajectory(np.zeros((5, 19)), 0)
    t = ActionTrajectory(np.zeros((5, 19)), 60)
    with pytest.raises(ValueError):
        t.data[0, 0] = 1.0


def test_constant_head_gives_zero_speed():
    assert np.all(neck_angular_speed(traj(still_actions(50))).values == 0)


def test_single_yaw_step():
    a = still_actions(10)
    a[5:, 16] += 0.02
    v = neck_angular_speed(traj(a, 60)).values
    assert v[4] == pytest.approx(1.2)
    assert np.count_nonzero(v) == 1


def test_stationary_arm_zero_speed():
    t = traj(still_actions(30))
    for arm in ("left", "right"):
        assert np.all(ee_linear_speed(t, arm).values == 0)


@pytest.mark.parametrize("rate", [20.0, 60.0, 100.0])
def test_straight_reach_mean_speed(rate):
    n = int(rate) + 1
    a = still_actions(n)
    a[:, 0] += np.linspace(0, 0.30, n)
    assert ee_linear_speed(traj(a, rate), "left").values.mean() == pytest.approx(0.30)


def test_invalid_arm():
    with pytest.raises(ValueError):
        ee_linear_speed(traj(still_actions(5)), "middle")


def test_planted_saccade_peak_speed():
    # min-jerk peak speed is 1.875 * amplitude / duration at tau = 0.5
    neck = NeckPlan((0.0, 0.3, 0.0), (0.0, 0.3, 0.6), 2.0, 0.3)
    spec = PlantSpec(60.0, 4.0, None, None, neck)
    v = neck_angular_speed(render(spec)).values
    peak = 1.875 * 0.6 / neck.saccade_duration_s
    # a step averages the speed over 1/60 s; the curvature bound gives the slack
    D = neck.saccade_duration_s
    slack = 0.6 / D * (minjerk_rate(0.5) - minjerk_rate(0.5 + 1 / (60 * D)))
    assert peak - slack - 1e-9 <= v.max() <= peak + 1e-9


def test_planted_reach_transition():
    plan = ArmPlan(1.0, 2.0, 0.3, 2.5, (1.0, 0.0, 0.0), (0.25, 0.2, 1.05))
    t = render(PlantSpec(60.0, 3.0, plan, None, None))
    v = ee_linear_speed(t, "left").values
    first = int(np.flatnonzero(v >= 0.05)[0])
    # min-jerk speed crosses 0.05 m/s shortly after the planted start at frame 60
    rise, _ = minjerk_speed_crossings(0.3, 1.0, 0.05)
    k = 60 + rise * 60
    assert abs(first - k) <= 1


def test_gripper_events_examples():
    assert gripper_sign_changes([0.5, 0.5, 0.5]) == []
    assert gripper_sign_changes([-1, -1, 1, 1]) == [2]
    assert gripper_sign_changes([1, 0, -0.0, 1]) == []  # zero counts as positive
    assert gripper_sign_changes([1, -1, 1, -1]) == [1, 2, 3]


def test_gripper_hysteresis_suppresses_chatter():
    g = [1, 0.05, -0.05, 0.04, -0.02, -1, -1]
    assert gripper_sign_changes(g) == [2, 3, 4]
    assert gripper_sign_changes(g, hysteresis=0.1) == [5]


def test_planted_grasp_event():
    plan = ArmPlan(0.5, 1.5, 0.2, 2.0, (1.0, 0.0, 0.0), (0.25, 0.2, 1.05))
    t = render(PlantSpec(60.0, 3.0, plan, None, None))
    assert gripper_events(t, "left").event_frames == (120,)
    assert gripper_events(t, "right").event_frames == ()


def test_downsample_examples():
    t = traj(np.random.default_rng(0).normal(size=(601, 19)), 60)
    d = downsample_stride(t, 3)
    assert d.rate_hz == 20 and d.n_frames == 201
    np.testing.assert_array_equal(d.data, t.data[::3])
    assert downsample_stride(t, 1) is t
    with pytest.raises(ValueError):
        downsample_stride(t, 0)


def test_fix_constant_dims_examples():
    spec = fix_constant_dims([1.0, 2.0], [0.0, 0.2], epsilon=1e-6)
    assert spec.dims[0].identity_flag and (spec.dims[0].mean, spec.dims[0].std) == (0.0, 1.0)
    assert not spec.dims[1].identity_flag and (spec.dims[1].mean, spec.dims[1].std) == (2.0, 0.2)

    rng = np.random.default_rng(3)
    std = rng.uniform(0.1, 1.0, 19)
    locked = [14, 3, 10, 17]
    std[locked] = 0.0
    spec = fix_constant_dims(rng.normal(size=19), std)
    assert sorted(spec.identity_dims) == sorted(locked)


def test_fix_constant_dims_rejects_negative_std():
    with pytest.raises(ValueError):
        fix_constant_dims([0.0], [-1.0])


@given(actions, arrays(np.float64, 19, elements=finite))
def test_speed_translation_invariance(a, offset):
    t1, t2 = traj(a), traj(a + offset)
    np.testing.assert_allclose(neck_angular_speed(t1).values, neck_angular_speed(t2).values, atol=1e-6)
    for arm in ("left", "right"):
        np.testing.assert_allclose(ee_linear_speed(t1, arm).values, ee_linear_speed(t2, arm).values, atol=1e-6)


@given(actions)
def test_speed_nonnegative_and_length(a):
    t = traj(a)
    for s in (neck_angular_speed(t), ee_linear_speed(t, "left"), ee_linear_speed(t, "right")):
        assert len(s) == t.n_frames - 1
        assert np.all(s.values >= 0)


@given(st.integers(2, 200), st.integers(1, 5), st.integers(1, 5))
def test_stride_composition(n, a, b):
    assume((n - 1) // (a * b) >= 1)
    t = traj(np.arange(n * 19, dtype=float).reshape(n, 19))
    ab = downsample_stride(downsample_stride(t, a), b)
    d = downsample_stride(t, a * b)
    np.testing.assert_array_equal(ab.data, d.data)
    assert ab.rate_hz == pytest.approx(d.rate_hz)


grip = st.one_of(st.just(0.0), st.floats(1e-3, 2), st.floats(-2, -1e-3))


@given(st.lists(grip, min_size=1, max_size=50), st.floats(0.01, 100))
def test_gripper_events_scale_invariant(g, scale):
    assert gripper_sign_changes(g) == gripper_sign_changes([scale * v for v in g])


@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=50))
def test_gripper_events_strictly_increasing(g):
    ev = gripper_sign_changes(g)
    assert all(e >= 1 for e in ev)
    assert all(b > a for a, b in zip(ev, ev[1:]))
