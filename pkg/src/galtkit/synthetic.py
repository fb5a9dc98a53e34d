"""Synthetic episodes with planted, analytically known GALT events.

Reaches and saccades follow minimum-jerk profiles, so speed curves, velocity
threshold crossings and the time the head enters the arrival margin all have
closed forms. The truth attached to each episode is derived from the plan,
never by running the detector.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Literal, Mapping

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.optimize import brentq

from galtkit.detector import SKIP_PRIORITY, GaltConfig, frames_for
from galtkit.trajectory import ARMS, CANONICAL_LAYOUT, ActionTrajectory, Arm

OutcomeCode = Literal[
    "ok", "no_gripper_event", "no_hand_onset", "no_fixation", "outlier_low", "outlier_high", "ambiguous_arms"
]
PLANTABLE: tuple[str, ...] = (
    "ok", "no_gripper_event", "no_hand_onset", "no_fixation", "outlier_low", "outlier_high", "ambiguous_arms"
)


def minjerk(tau):
    """Normalized minimum-jerk position s(tau) on [0, 1], clamped outside."""
    tau = np.clip(tau, 0.0, 1.0)
    return tau**3 * (10 - 15 * tau + 6 * tau**2)


def minjerk_rate(tau):
    """ds/dtau = 30 tau^2 (1 - tau)^2."""
    tau = np.clip(tau, 0.0, 1.0)
    return 30 * tau**2 * (1 - tau) ** 2


def minjerk_fraction_time(frac: float) -> float:
    """tau at which s(tau) = frac."""
    if not 0 <= frac <= 1:
        raise ValueError("fraction must be in [0, 1]")
    if frac in (0.0, 1.0):
        return frac
    return brentq(lambda t: float(minjerk(t)) - frac, 0.0, 1.0, xtol=1e-14)


def minjerk_speed_crossings(amplitude: float, duration: float, thresh: float) -> tuple[float, float] | None:
    """Normalized times (rise, fall) where amplitude * s'(t/D) / D equals ``thresh``.

    None if the peak speed (1.875 * amplitude / duration) never exceeds it.
    """
    c = thresh * duration / amplitude
    u = math.sqrt(c / 30)  # tau * (1 - tau)
    if 4 * u >= 1:
        return None
    r = math.sqrt(1 - 4 * u)
    return (1 - r) / 2, (1 + r) / 2


def first_frame_at(t: float, rate_hz: float) -> int:
    """Index of the first sample at or after time ``t``."""
    return max(0, math.ceil(t * rate_hz - 1e-9))


@dataclasses.dataclass(frozen=True)
class ArmPlan:
    reach_start_s: float
    reach_end_s: float
    reach_distance_m: float
    grasp_time_s: float | None = None
    direction: tuple[float, float, float] = (1.0, 0.0, 0.0)
    start_pos: tuple[float, float, float] | None = None
    chatter_s: float = 0.0  # sign-flipping command noise right after the grasp
    chatter_amplitude: float = 0.05

    def __post_init__(self):
        if self.chatter_s < 0 or not 0 < self.chatter_amplitude < 1:
            raise ValueError("chatter_s must be >= 0 and chatter_amplitude in (0, 1)")
        if self.reach_end_s <= self.reach_start_s:
            raise ValueError("reach must end after it starts")
        if self.reach_distance_m < 0:
            raise ValueError("reach distance must be >= 0")
        n = float(np.linalg.norm(self.direction))
        if n == 0:
            raise ValueError("reach direction must be nonzero")
        object.__setattr__(self, "direction", tuple(float(v) / n for v in self.direction))

    @property
    def duration(self) -> float:
        return self.reach_end_s - self.reach_start_s

    def positions(self, t: np.ndarray, default_start: tuple[float, float, float]) -> np.ndarray:
        start = np.asarray(self.start_pos if self.start_pos is not None else default_start)
        s = minjerk((t - self.reach_start_s) / self.duration)
        return start + np.outer(s * self.reach_distance_m, self.direction)

    def gripper(self, t: np.ndarray, rate_hz: float) -> np.ndarray:
        g = np.full(t.shape, -1.0)
        if self.grasp_time_s is not None:
            g[t >= self.grasp_time_s - 1e-9] = 1.0
            k0 = first_frame_at(self.grasp_time_s, rate_hz)
            n = min(self.chatter_frames(rate_hz), len(g) - k0 - 1)
            g[k0 + 1 : k0 + 1 + n] = self.chatter_amplitude * (-1.0) ** np.arange(1, n + 1)
        return g

    def chatter_frames(self, rate_hz: float) -> int:
        return frames_for(self.chatter_s, rate_hz) if self.chatter_s > 0 else 0


@dataclasses.dataclass(frozen=True)
class NeckPlan:
    """Head motion: hold, one minimum-jerk saccade, hold (optionally a later pan).

    The saccade is timed so the head enters the L-inf ``arrival_margin_rad``
    ball around ``fixation_pose`` exactly at ``fixation_arrival_s`` and stops
    ``deceleration_tail_s`` later. A pan (constant yaw rate) from
    ``pan_start_s`` breaks the fixation.
    """

    start_pose: tuple[float, float, float]
    fixation_pose: tuple[float, float, float]
    fixation_arrival_s: float
    deceleration_tail_s: float
    arrival_margin_rad: float = 0.05
    pan_start_s: float | None = None
    pan_rate_rad_s: float = 0.3

    def __post_init__(self):
        if self.amplitude_inf <= self.arrival_margin_rad:
            raise ValueError("saccade amplitude must exceed the arrival margin")
        if self.deceleration_tail_s <= 0:
            raise ValueError("deceleration tail must be positive")
        if self.saccade_start_s < 0:
            raise ValueError(f"saccade would start before t=0 ({self.saccade_start_s:.3f} s)")

    @property
    def delta(self) -> np.ndarray:
        return np.asarray(self.fixation_pose) - np.asarray(self.start_pose)

    @property
    def amplitude_inf(self) -> float:
        return float(np.max(np.abs(self.delta)))

    @property
    def amplitude_2(self) -> float:
        return float(np.linalg.norm(self.delta))

    @property
    def entry_tau(self) -> float:
        return minjerk_fraction_time(1 - self.arrival_margin_rad / self.amplitude_inf)

    @property
    def saccade_duration_s(self) -> float:
        return self.deceleration_tail_s / (1 - self.entry_tau)

    @property
    def saccade_start_s(self) -> float:
        return self.fixation_arrival_s - self.entry_tau * self.saccade_duration_s

    @property
    def saccade_end_s(self) -> float:
        return self.fixation_arrival_s + self.deceleration_tail_s

    def speed_crossings_s(self, v_thresh: float) -> tuple[float, float] | None:
        """Absolute times the neck speed rises above / falls below ``v_thresh``."""
        c = minjerk_speed_crossings(self.amplitude_2, self.saccade_duration_s, v_thresh)
        if c is None:
            return None
        return tuple(self.saccade_start_s + tau * self.saccade_duration_s for tau in c)

    def poses(self, t: np.ndarray) -> np.ndarray:
        s = minjerk((t - self.saccade_start_s) / self.saccade_duration_s)
        q = np.asarray(self.start_pose) + np.outer(s, self.delta)
        if self.pan_start_s is not None:
            q[:, 2] += self.pan_rate_rad_s * np.clip(t - self.pan_start_s, 0.0, None)
        return q


@dataclasses.dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian noise, low-pass filtered so the marginal std stays at the sigma.

    ``smoothing_s`` is the Gaussian kernel std; 0 gives white noise.
    """

    pos_sigma_m: float = 0.0
    neck_sigma_rad: float = 0.0
    smoothing_s: float = 0.2

    def __post_init__(self):
        if self.pos_sigma_m < 0 or self.neck_sigma_rad < 0 or self.smoothing_s < 0:
            raise ValueError("noise parameters must be >= 0")


@dataclasses.dataclass(frozen=True)
class PlantSpec:
    rate_hz: float
    duration_s: float
    left: ArmPlan | None
    right: ArmPlan | None
    neck: NeckPlan | None  # None: head never moves
    noise: NoiseSpec = NoiseSpec()
    seed: int = 0
    static_head_pose: tuple[float, float, float] = (0.0, 0.3, 0.0)

    def __post_init__(self):
        if not self.rate_hz > 0 or not self.duration_s > 0:
            raise ValueError("rate_hz and duration_s must be positive")
        for arm in (self.left, self.right):
            if arm is None:
                continue
            times = [arm.reach_end_s] + ([arm.grasp_time_s] if arm.grasp_time_s is not None else [])
            if max(times) > self.duration_s or arm.reach_start_s < 0:
                raise ValueError("arm events must lie within the episode")
        if self.neck is not None and self.neck.fixation_arrival_s > self.duration_s:
            raise ValueError("fixation arrival after episode end")

    @property
    def n_frames(self) -> int:
        return int(math.floor(self.duration_s * self.rate_hz + 1e-9)) + 1

    def arm(self, arm: Arm) -> ArmPlan | None:
        return self.left if arm == "left" else self.right


@dataclasses.dataclass(frozen=True)
class PlantedTruth:
    t_hand: Mapping[str, int | None]
    t_onset: Mapping[str, int | None]
    t_head: int | None  # analytic arrival frame of the planted fixation
    galt_s: float | None  # grasp time minus margin entry around the run-mean pose
    arm: Arm | None
    code: OutcomeCode
    arm_codes: Mapping[str, str]
    planned_galt_s: float | None = None  # grasp time minus the plan's fixation_arrival_s

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_DEFAULT_EE = {"left": (0.25, 0.20, 1.05), "right": (0.25, -0.20, 1.05)}
_QUAT = (1.0, 0.0, 0.0, 0.0)


def _smoothed_noise(rng: np.random.Generator, shape: tuple[int, int], sigma: float, smoothing_frames: float):
    if sigma == 0:
        return np.zeros(shape)
    w = rng.standard_normal(shape)
    if smoothing_frames > 0:
        w = gaussian_filter1d(w, smoothing_frames, axis=0, mode="reflect")
        # gaussian_filter1d shrinks the variance; rescale to the target marginal std
        k = np.exp(-0.5 * (np.arange(-4 * smoothing_frames, 4 * smoothing_frames + 1) / smoothing_frames) ** 2)
        k /= k.sum()
        w /= math.sqrt(float(np.sum(k**2)))
    return sigma * w


def render(spec: PlantSpec) -> ActionTrajectory:
    lay = CANONICAL_LAYOUT
    T = spec.n_frames
    t = np.arange(T) / spec.rate_hz
    data = np.zeros((T, lay.total_dims))
    rng = np.random.default_rng(spec.seed)
    smooth = spec.noise.smoothing_s * spec.rate_hz

    for arm in ARMS:
        plan = spec.arm(arm)
        if plan is None:
            pos = np.tile(_DEFAULT_EE[arm], (T, 1))
            grip = np.full(T, -1.0)
        else:
            pos = plan.positions(t, _DEFAULT_EE[arm])
            grip = plan.gripper(t, spec.rate_hz)
        pos = pos + _smoothed_noise(rng, pos.shape, spec.noise.pos_sigma_m, smooth)
        data[:, list(lay.ee_pos(arm))] = pos
        data[:, list(lay.left_ee_quat if arm == "left" else lay.right_ee_quat)] = _QUAT
        data[:, lay.gripper(arm)] = grip

    head = spec.neck.poses(t) if spec.neck is not None else np.tile(spec.static_head_pose, (T, 1))
    # roll is locked, so only pitch/yaw get noise
    head[:, 1:] += _smoothed_noise(rng, (T, 2), spec.noise.neck_sigma_rad, smooth)
    data[:, list(lay.head_joints)] = head
    return ActionTrajectory(data, spec.rate_hz, lay)


def _truth_anchor(plan: ArmPlan, f: float, n_frames: int, cfg: GaltConfig) -> int:
    """Last gripper sign change: the grasp frame unless chatter outlasts the hysteresis."""
    k0 = first_frame_at(plan.grasp_time_s, f)
    n = min(plan.chatter_frames(f), n_frames - k0 - 1)
    if n == 0 or cfg.gripper_hysteresis >= plan.chatter_amplitude:
        return k0
    # chatter is -a, +a, ... then the +1 hold, which flips again after an odd count
    return k0 + n + 1 if n % 2 and k0 + n + 1 < n_frames else k0 + n


def _truth_onset(plan: ArmPlan, anchor: int, f: float, cfg: GaltConfig) -> int | None:
    """Analytic end of the latest stable run before the anchor."""
    need = max(1, frames_for(cfg.min_stable_for_onset_s, f))
    cross = minjerk_speed_crossings(plan.reach_distance_m, plan.duration, cfg.v_hand_thresh)
    if cross is None:
        return anchor - 1 if anchor >= need else None
    times = tuple(plan.reach_start_s + c * plan.duration for c in cross)
    rise, fall = _slow_step_bounds(lambda t: plan.positions(t, (0.0, 0.0, 0.0)), times, cfg.v_hand_thresh, f)
    # steps from the first slow step after the reach up to the anchor
    if anchor - fall >= need:
        return anchor - 1
    pre_end = min(rise, anchor) - 1  # last step before the speed rises
    if pre_end + 1 >= need:
        return pre_end
    return None


def _truth_fixation(spec: PlantSpec, anchor: int, cfg: GaltConfig) -> tuple[int, float] | None:
    """Analytic counterpart of the windowed nearest-fixation search.

    Returns the expected arrival frame and the continuous arrival time.
    """
    f = spec.rate_hz
    last_step = spec.n_frames - 2
    need = max(1, frames_for(cfg.k_fix_s, f))
    lo = anchor - frames_for(cfg.lookback_s, f)
    hi = anchor + frames_for(cfg.forward_slack_s, f)
    neck = spec.neck
    # (run start step, run end step, arrival frame, arrival time)
    if neck is None:
        runs = [(0, last_step, 0, 0.0)]
    else:
        cross = neck.speed_crossings_s(cfg.v_sac_thresh)
        if cross is None:
            raise ValueError("planted saccade never exceeds the neck speed threshold")
        end = last_step if neck.pan_start_s is None else min(last_step, first_frame_at(neck.pan_start_s, f) - 1)
        rise, fall = _slow_step_bounds(neck.poses, cross, cfg.v_sac_thresh, f)
        runs = [
            (0, rise - 1, 0, 0.0),
            (fall, end, first_frame_at(neck.fixation_arrival_s, f), neck.fixation_arrival_s),
        ]
    best = None
    for start, end, frame, time in runs:
        if end - start + 1 < need or start > hi or end < lo:
            continue
        cand = max(start, lo)
        key = (abs(cand - anchor), cand)
        if best is None or key < best[0]:
            best = (key, (start, end, frame, time), cand)
    if best is None:
        return None
    _, (start, end, frame, time), cand = best
    if frame == 0 or neck is None:
        return 0, 0.0
    if cfg.arrival_margin_rad == 0:
        return cand, cand / f
    time = _margin_entry_s(neck, start, end, cfg.arrival_margin_rad, f)
    return min(first_frame_at(time, f), cand), time


def _slow_step_bounds(poses, cross: tuple[float, float], v: float, rate_hz: float) -> tuple[int, int]:
    """First fast step and first slow step after it, from exact per-step displacements.

    A step's speed is its mean over one frame period, so the boundaries can
    sit a step away from the continuous crossings; search around those.
    """

    def fast(k: int) -> bool:
        q = poses(np.array([k, k + 1]) / rate_hz)
        return np.linalg.norm(q[1] - q[0]) * rate_hz >= v

    rise = max(0, math.floor(cross[0] * rate_hz) - 1)
    while not fast(rise):
        rise += 1
    fall = max(rise, math.floor(cross[1] * rate_hz) - 1)
    while fast(fall):
        fall += 1
    return rise, fall


def _margin_entry_s(neck: NeckPlan, start: int, end: int, margin: float, rate_hz: float) -> float:
    """Time the saccade enters the L-inf ``margin`` ball around the run's mean pose.

    The settled pose is averaged over the run's frames, so it sits slightly
    short of ``fixation_pose`` and entry comes a little before the planned
    arrival.
    """
    q_star = neck.poses(np.arange(start, end + 2) / rate_hz).mean(axis=0)
    q0, d = np.asarray(neck.start_pose), neck.delta
    need = 0.0
    for i in np.flatnonzero(d):
        # progress s along the path at which axis i comes within the margin
        need = max(need, (q_star[i] - q0[i] - np.sign(d[i]) * margin) / d[i])
    if need <= 0:
        return neck.saccade_start_s
    return neck.saccade_start_s + minjerk_fraction_time(min(need, 1.0)) * neck.saccade_duration_s


def planted_truth(spec: PlantSpec, cfg: GaltConfig | None = None) -> PlantedTruth:
    cfg = cfg or GaltConfig()
    f = spec.rate_hz
    t_hand: dict[str, int | None] = {}
    t_onset: dict[str, int | None] = {}
    codes: dict[str, str] = {}
    found: dict[str, tuple[int, float]] = {}
    for arm in ARMS:
        plan = spec.arm(arm)
        t_hand[arm] = t_onset[arm] = None
        if plan is None or plan.grasp_time_s is None:
            codes[arm] = "no_gripper_event"
            continue
        anchor = _truth_anchor(plan, f, spec.n_frames, cfg)
        t_hand[arm] = anchor
        t_onset[arm] = _truth_onset(plan, anchor, f, cfg)
        if t_onset[arm] is None:
            codes[arm] = "no_hand_onset"
            continue
        head = _truth_fixation(spec, anchor, cfg)
        if head is None:
            codes[arm] = "no_fixation"
            continue
        g = (anchor - head[0]) / f
        if g < cfg.outlier_min_s:
            codes[arm] = "outlier_low"
        elif g > cfg.outlier_max_s:
            codes[arm] = "outlier_high"
        else:
            codes[arm] = "ok"
            found[arm] = head

    ok = [a for a in ARMS if codes[a] == "ok"]
    planted_head = 0 if spec.neck is None else first_frame_at(spec.neck.fixation_arrival_s, f)
    if len(ok) == 2:
        return PlantedTruth(t_hand, t_onset, planted_head, None, None, "ambiguous_arms", codes)
    if len(ok) == 1:
        a = ok[0]
        frame, arrival = found[a]
        # chatter can move the anchor past the grasp frame
        grasp = spec.arm(a).grasp_time_s + (t_hand[a] - first_frame_at(spec.arm(a).grasp_time_s, f)) / f
        planned = grasp - spec.neck.fixation_arrival_s if spec.neck is not None else grasp
        return PlantedTruth(t_hand, t_onset, frame, grasp - arrival, a, "ok", codes, planned)
    code = min(codes.values(), key=SKIP_PRIORITY.index)
    return PlantedTruth(t_hand, t_onset, planted_head, None, None, code, codes)


def generate_episode(spec: PlantSpec, cfg: GaltConfig | None = None) -> tuple[ActionTrajectory, PlantedTruth]:
    return render(spec), planted_truth(spec, cfg)


# ---- corpus sampling ----


@dataclasses.dataclass(frozen=True)
class CorpusDistribution:
    """Parameter ranges for :func:`generate_corpus`.

    ``codes`` lists the outcome codes to plant, cycled by episode index.
    """

    rate_hz: float = 60.0
    galt_range_s: tuple[float, float] = (0.0, 3.0)
    saccade_amplitude_rad: tuple[float, float] = (0.3, 0.8)
    deceleration_tail_s: tuple[float, float] = (0.15, 0.5)
    reach_distance_m: tuple[float, float] = (0.2, 0.4)
    reach_duration_s: tuple[float, float] = (0.8, 1.5)
    codes: tuple[str, ...] = ("ok",)
    noise: NoiseSpec = NoiseSpec()
    arrival_margin_rad: float = 0.05
    post_grasp_s: float = 1.0

    def __post_init__(self):
        bad = set(self.codes) - set(PLANTABLE)
        if bad or not self.codes:
            raise ValueError(f"unknown planted codes {sorted(bad)}")


def _reach_dir(rng: np.random.Generator, arm: Arm) -> tuple[float, float, float]:
    side = 1.0 if arm == "left" else -1.0
    return (1.0, side * rng.uniform(-0.4, 0.4), rng.uniform(-0.3, 0.1))


def sample_plant(rng: np.random.Generator, dist: CorpusDistribution, code: str, seed: int) -> PlantSpec:
    """Draw one plan that plants ``code`` under the default detector config.

    outlier_low is the exception: with the default 0.5 s forward slack a run
    starting inside the window can never give GALT < -0.5 s, so those plans
    need ``forward_slack_s >= 1.0``.
    """
    amp = rng.uniform(*dist.saccade_amplitude_rad) * rng.choice([-1.0, 1.0])
    pitch = rng.uniform(-0.2, 0.2)
    start_pose = (0.0, 0.3, 0.0)
    fix_pose = (0.0, 0.3 + pitch, amp)
    tail = rng.uniform(*dist.deceleration_tail_s)
    arm: Arm = "left" if rng.random() < 0.5 else "right"
    reach_dur = rng.uniform(*dist.reach_duration_s)
    gap = rng.uniform(0.0, 0.1)

    def plan(a: Arm, grasp_time: float | None, start: float, dur: float = reach_dur) -> ArmPlan:
        return ArmPlan(start, start + dur, rng.uniform(*dist.reach_distance_m), grasp_time, _reach_dir(rng, a))

    if code == "no_hand_onset":
        # the reach starts at t=0 and the grasp closes right at its end: no stillness long enough
        tail = 0.15
        neck = NeckPlan(start_pose, fix_pose, 10.0, tail, dist.arrival_margin_rad)
        dur = rng.uniform(0.9, 1.3)
        arrival = neck.entry_tau * neck.saccade_duration_s + rng.uniform(0.02, 0.1)
        neck = dataclasses.replace(neck, fixation_arrival_s=arrival)
        plans = {arm: plan(arm, dur, 0.0, dur), _other(arm): None}
        return PlantSpec(dist.rate_hz, dur + dist.post_grasp_s, plans["left"], plans["right"], neck, dist.noise, seed)

    if code in ("ok", "no_gripper_event", "ambiguous_arms"):
        lead = rng.uniform(*dist.galt_range_s)
    elif code == "outlier_high":
        lead = rng.uniform(4.3, 6.0)
    elif code == "no_fixation":
        lead = rng.uniform(3.8, 6.0)
    else:  # outlier_low
        lead = rng.uniform(-0.8, -0.6)
        tail = rng.uniform(0.1, 0.15)

    # head: hold >= 0.4 s, then the saccade
    neck = NeckPlan(start_pose, fix_pose, 10.0, tail, dist.arrival_margin_rad)
    arrival = 0.4 + rng.uniform(0.0, 0.4) + neck.entry_tau * neck.saccade_duration_s
    grasp = arrival + lead
    reach_start = grasp - gap - reach_dur
    if reach_start < 0.6:
        shift = 0.6 - reach_start
        grasp += shift
        arrival += shift
        reach_start = 0.6
    neck = dataclasses.replace(neck, fixation_arrival_s=arrival)
    if code == "no_fixation":
        # fixation breaks into a pan well before the lookback window opens
        neck = dataclasses.replace(neck, pan_start_s=arrival + 0.5 * (lead - 3.0))

    grasp_time = None if code == "no_gripper_event" else grasp
    plans: dict[str, ArmPlan | None] = {arm: plan(arm, grasp_time, reach_start), _other(arm): None}
    last_event = grasp
    if code == "ambiguous_arms":
        # second arm: its own valid lead, reach still starting after 0.6 s
        low = max(0.2, 0.6 + gap + reach_dur - arrival)
        grasp2 = arrival + rng.uniform(low, max(low, min(3.0, dist.galt_range_s[1])))
        plans[_other(arm)] = plan(_other(arm), grasp2, grasp2 - gap - reach_dur)
        last_event = max(grasp, grasp2)
    return PlantSpec(
        dist.rate_hz, last_event + dist.post_grasp_s, plans["left"], plans["right"], neck, dist.noise, seed
    )


def _other(arm: Arm) -> Arm:
    return "right" if arm == "left" else "left"


@dataclasses.dataclass(frozen=True)
class SyntheticEpisode:
    episode_id: str
    trajectory: ActionTrajectory
    truth: PlantedTruth
    spec: PlantSpec


def generate_corpus(
    n: int,
    dist: CorpusDistribution | None = None,
    seed: int = 0,
    cfg: GaltConfig | None = None,
) -> list[SyntheticEpisode]:
    """``n`` independent episodes; episode ``i`` depends only on ``(seed, i)``."""
    if n < 1:
        raise ValueError("corpus size must be >= 1")
    dist = dist or CorpusDistribution()
    out = []
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        code = dist.codes[i % len(dist.codes)]
        spec = sample_plant(rng, dist, code, seed=int(rng.integers(2**63)))
        traj, truth = generate_episode(spec, cfg)
        out.append(SyntheticEpisode(f"synth-{seed}-{i:05d}", traj, truth, spec))
    return out
