"""Gaze-action lead time (GALT) detection from commanded actions.

GALT = t_hand - t_head, in seconds. ``t_hand`` is the last gripper-command
sign change of an arm; ``t_head`` is the arrival of the neck fixation nearest
to it, found inside a lookback/slack window and refined backwards in
joint space. A positive value means the head settled before the grasp.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Literal, Sequence

import numpy as np

from galtkit.trajectory import (
    ARMS,
    ActionTrajectory,
    Arm,
    SignalTrack,
    ee_linear_speed,
    gripper_events,
    neck_angular_speed,
)

ArmStatus = Literal["ok", "no_gripper_event", "no_hand_onset", "no_fixation", "outlier_low", "outlier_high"]
SkipCode = Literal[
    "no_gripper_event",
    "no_hand_onset",
    "no_fixation",
    "outlier_low",
    "outlier_high",
    "ambiguous_arms",
    "invalid_input",
]

# most informative first: the arm that got furthest through the pipeline wins
SKIP_PRIORITY: tuple[str, ...] = ("outlier_high", "outlier_low", "no_fixation", "no_hand_onset", "no_gripper_event")


@dataclasses.dataclass(frozen=True)
class GaltConfig:
    v_hand_thresh: float = 0.05  # m/s
    v_sac_thresh: float = 0.10  # rad/s
    k_fix_s: float = 0.080
    min_stable_for_onset_s: float = 0.300
    lookback_s: float = 3.0
    forward_slack_s: float = 0.5
    arrival_margin_rad: float = 0.05  # 0 disables refinement
    outlier_min_s: float = -0.5
    outlier_max_s: float = 4.0
    gripper_hysteresis: float = 0.0

    def __post_init__(self):
        for name in ("v_hand_thresh", "v_sac_thresh", "k_fix_s", "min_stable_for_onset_s", "lookback_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("forward_slack_s", "arrival_margin_rad", "gripper_hysteresis"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.outlier_min_s < self.outlier_max_s:
            raise ValueError("outlier_min_s must be < outlier_max_s")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def frames_for(seconds: float, rate_hz: float) -> int:
    """Whole frames needed to span ``seconds`` (0.3 s -> 6 at 20 Hz, 18 at 60 Hz)."""
    # the tolerance keeps products like 0.3 * 60 from rounding up to 19
    return max(0, math.ceil(seconds * rate_hz - 1e-9))


def runs_below(values: np.ndarray, thresh: float) -> list[tuple[int, int]]:
    """Maximal runs of ``values < thresh`` as inclusive (start, end) index pairs."""
    below = np.concatenate([[False], np.asarray(values) < thresh, [False]])
    edges = np.flatnonzero(np.diff(below.astype(np.int8)))
    return [(int(s), int(e) - 1) for s, e in zip(edges[::2], edges[1::2])]


def detect_hand_onset(speed: SignalTrack | np.ndarray, anchor: int, cfg: GaltConfig, rate_hz: float) -> int | None:
    """End of the latest long-enough below-``v_hand_thresh`` run ending before ``anchor``.

    Runs are truncated at the anchor, so an arm that is still right up to the
    grasp yields ``anchor - 1``.
    """
    values = speed.values if isinstance(speed, SignalTrack) else np.asarray(speed)
    if not 0 <= anchor <= len(values):
        raise ValueError(f"anchor {anchor} outside track of length {len(values)}")
    need = max(1, frames_for(cfg.min_stable_for_onset_s, rate_hz))
    for start, end in reversed(runs_below(values[:anchor], cfg.v_hand_thresh)):
        if end - start + 1 >= need:
            return end
    return None


@dataclasses.dataclass(frozen=True)
class FixationSearch:
    run: tuple[int, int]  # selected run, inclusive step indices
    candidate: int  # run start clipped to the search window
    refined: int
    pose: np.ndarray = dataclasses.field(compare=False)


def search_fixation(
    neck_speed: SignalTrack | np.ndarray,
    head_joints: np.ndarray,
    anchor: int,
    cfg: GaltConfig,
    rate_hz: float,
) -> FixationSearch | None:
    values = neck_speed.values if isinstance(neck_speed, SignalTrack) else np.asarray(neck_speed)
    head_joints = np.asarray(head_joints)
    lo = anchor - frames_for(cfg.lookback_s, rate_hz)
    hi = anchor + frames_for(cfg.forward_slack_s, rate_hz)
    need = max(1, frames_for(cfg.k_fix_s, rate_hz))

    best = None
    for start, end in runs_below(values, cfg.v_sac_thresh):
        if end - start + 1 < need or start > hi or end < lo:
            continue
        cand = max(start, lo)
        key = (abs(cand - anchor), cand)  # ties go to the earlier run
        if best is None or key < best[0]:
            best = (key, (start, end), cand)
    if best is None:
        return None
    _, (start, end), cand = best

    # the run covers frames start..end+1
    pose = head_joints[start : end + 2].mean(axis=0)
    t = cand
    while t > 0 and np.max(np.abs(head_joints[t - 1] - pose)) <= cfg.arrival_margin_rad:
        t -= 1
    return FixationSearch((start, end), cand, t, pose)


def detect_head_fixation(
    neck_speed: SignalTrack | np.ndarray,
    head_joints: np.ndarray,
    anchor: int,
    cfg: GaltConfig,
    rate_hz: float,
) -> int | None:
    """Refined arrival frame of the fixation nearest to ``anchor``, or None."""
    found = search_fixation(neck_speed, head_joints, anchor, cfg, rate_hz)
    return None if found is None else found.refined


@dataclasses.dataclass(frozen=True)
class ArmDetection:
    arm: Arm
    status: ArmStatus
    t_hand: int | None = None
    t_onset: int | None = None
    t_head: int | None = None
    galt_s: float | None = None
    rejected_galt_s: float | None = None  # value that tripped an outlier bound

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class GaltOutcome:
    episode_id: str
    galt_s: float | None
    arm: Arm | None
    skip_code: SkipCode | None
    per_arm: tuple[ArmDetection, ...] = ()
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.skip_code is None

    def to_dict(self) -> dict:
        return {
            "episode_id": self.episode_id,
            "galt_s": self.galt_s,
            "arm": self.arm,
            "skip_code": self.skip_code,
            "per_arm": [a.to_dict() for a in self.per_arm],
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GaltOutcome":
        return cls(
            episode_id=d["episode_id"],
            galt_s=d["galt_s"],
            arm=d["arm"],
            skip_code=d["skip_code"],
            per_arm=tuple(ArmDetection(**a) for a in d.get("per_arm", [])),
            error=d.get("error"),
        )


def detect_arm(
    traj: ActionTrajectory,
    arm: Arm,
    cfg: GaltConfig,
    neck_speed: SignalTrack | None = None,
) -> ArmDetection:
    f = traj.rate_hz
    events = gripper_events(traj, arm, cfg.gripper_hysteresis).event_frames
    if not events:
        return ArmDetection(arm, "no_gripper_event")
    anchor = max(events)
    onset = detect_hand_onset(ee_linear_speed(traj, arm), anchor, cfg, f)
    if onset is None:
        return ArmDetection(arm, "no_hand_onset", t_hand=anchor)
    if neck_speed is None:
        neck_speed = neck_angular_speed(traj)
    head = detect_head_fixation(neck_speed, traj.head, anchor, cfg, f)
    if head is None:
        return ArmDetection(arm, "no_fixation", t_hand=anchor, t_onset=onset)
    g = (anchor - head) / f
    if g < cfg.outlier_min_s:
        return ArmDetection(arm, "outlier_low", anchor, onset, rejected_galt_s=g)
    if g > cfg.outlier_max_s:
        return ArmDetection(arm, "outlier_high", anchor, onset, rejected_galt_s=g)
    return ArmDetection(arm, "ok", anchor, onset, head, g)


def detect_galt(traj: ActionTrajectory, cfg: GaltConfig | None = None, episode_id: str = "") -> GaltOutcome:
    cfg = cfg or GaltConfig()
    if traj.n_frames < 2:
        raise ValueError("trajectory shorter than 2 frames")
    neck = neck_angular_speed(traj)
    per_arm = tuple(detect_arm(traj, arm, cfg, neck) for arm in ARMS)
    valid = [a for a in per_arm if a.ok]
    if len(valid) == 2:
        return GaltOutcome(episode_id, None, None, "ambiguous_arms", per_arm)
    if len(valid) == 1:
        return GaltOutcome(episode_id, valid[0].galt_s, valid[0].arm, None, per_arm)
    code = min((a.status for a in per_arm), key=SKIP_PRIORITY.index)
    return GaltOutcome(episode_id, None, None, code, per_arm)


def _detect_one(args: tuple[str, ActionTrajectory, GaltConfig]) -> GaltOutcome:
    episode_id, traj, cfg = args
    try:
        return detect_galt(traj, cfg, episode_id)
    except Exception as e:  # a bad episode must not abort the batch
        return GaltOutcome(episode_id, None, None, "invalid_input", (), f"{type(e).__name__}: {e}")


def detect_galt_batch(
    episodes: Iterable[tuple[str, ActionTrajectory]],
    cfg: GaltConfig | None = None,
    workers: int = 1,
) -> list[GaltOutcome]:
    """Run :func:`detect_galt` per episode; results keep input order."""
    cfg = cfg or GaltConfig()
    jobs = [(str(eid), traj, cfg) for eid, traj in episodes]
    if workers <= 1 or len(jobs) < 2:
        return [_detect_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_detect_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def sort_outcomes(outcomes: Sequence[GaltOutcome]) -> list[GaltOutcome]:
    return sorted(outcomes, key=lambda o: o.episode_id)
