"""Canonical action trajectories and the kinematic signals derived from them."""

from __future__ import annotations

import dataclasses
from typing import Literal, Mapping, Sequence

import numpy as np

Arm = Literal["left", "right"]
ARMS: tuple[Arm, Arm] = ("left", "right")


class LayoutError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class ActionLayout:
    """Maps named action channels to column indices of the action matrix.

    The default instance is the 19-D canonical layout: left arm pos xyz +
    quat wxyz (0-6), right arm (7-13), head roll/pitch/yaw (14-16), left and
    right gripper (17, 18).
    """

    left_ee_pos: tuple[int, ...] = (0, 1, 2)
    left_ee_quat: tuple[int, ...] = (3, 4, 5, 6)
    right_ee_pos: tuple[int, ...] = (7, 8, 9)
    right_ee_quat: tuple[int, ...] = (10, 11, 12, 13)
    head_joints: tuple[int, ...] = (14, 15, 16)
    left_gripper: int = 17
    right_gripper: int = 18
    total_dims: int = 19

    def __post_init__(self):
        for name in ("left_ee_pos", "left_ee_quat", "right_ee_pos", "right_ee_quat", "head_joints"):
            object.__setattr__(self, name, tuple(int(i) for i in getattr(self, name)))
        if len(self.left_ee_pos) != 3 or len(self.right_ee_pos) != 3:
            raise LayoutError("end-effector position needs exactly 3 columns")
        if len(self.left_ee_quat) not in (0, 4) or len(self.right_ee_quat) not in (0, 4):
            raise LayoutError("quaternion needs 4 columns (or none)")
        if not self.head_joints:
            raise LayoutError("layout has no head columns")
        used = [i for name in self._index_fields() for i in self._as_tuple(name)]
        if len(set(used)) != len(used):
            raise LayoutError(f"layout indices overlap: {sorted(used)}")
        if any(i < 0 or i >= self.total_dims for i in used):
            raise LayoutError(f"layout index out of range for total_dims={self.total_dims}")

    @staticmethod
    def _index_fields() -> tuple[str, ...]:
        return (
            "left_ee_pos",
            "left_ee_quat",
            "right_ee_pos",
            "right_ee_quat",
            "head_joints",
            "left_gripper",
            "right_gripper",
        )

    def _as_tuple(self, name: str) -> tuple[int, ...]:
        value = getattr(self, name)
        return value if isinstance(value, tuple) else (value,)

    def ee_pos(self, arm: Arm) -> tuple[int, ...]:
        return self.left_ee_pos if _check_arm(arm) == "left" else self.right_ee_pos

    def gripper(self, arm: Arm) -> int:
        return self.left_gripper if _check_arm(arm) == "left" else self.right_gripper

    def to_dict(self) -> dict:
        d = {name: list(getattr(self, name)) for name in self._index_fields()[:5]}
        d.update(left_gripper=self.left_gripper, right_gripper=self.right_gripper, total_dims=self.total_dims)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ActionLayout":
        try:
            return cls(**{k: (tuple(v) if isinstance(v, (list, tuple)) else v) for k, v in d.items()})
        except TypeError as e:
            raise LayoutError(str(e)) from e


CANONICAL_LAYOUT = ActionLayout()


def _check_arm(arm: str) -> Arm:
    if arm not in ARMS:
        raise ValueError(f"invalid arm tag {arm!r}; expected 'left' or 'right'")
    return arm  # type: ignore[return-value]


@dataclasses.dataclass(frozen=True, eq=False)
class ActionTrajectory:
    """T x D commanded actions sampled at ``rate_hz``."""

    data: np.ndarray
    rate_hz: float
    layout: ActionLayout = CANONICAL_LAYOUT

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"action data must be 2-D, got shape {data.shape}")
        if data.shape[0] < 2:
            raise ValueError(f"trajectory needs at least 2 frames, got {data.shape[0]}")
        if data.shape[1] != self.layout.total_dims:
            raise ValueError(f"action data has {data.shape[1]} columns, layout expects {self.layout.total_dims}")
        if not self.rate_hz > 0:
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz}")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "rate_hz", float(self.rate_hz))

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def head(self) -> np.ndarray:
        return self.data[:, list(self.layout.head_joints)]

    def ee_pos(self, arm: Arm) -> np.ndarray:
        return self.data[:, list(self.layout.ee_pos(arm))]

    def gripper(self, arm: Arm) -> np.ndarray:
        return self.data[:, self.layout.gripper(arm)]

    def prepend_still(self, n: int) -> "ActionTrajectory":
        """Prepend ``n`` copies of frame 0."""
        pad = np.repeat(self.data[:1], n, axis=0)
        return dataclasses.replace(self, data=np.vstack([pad, self.data]))


@dataclasses.dataclass(frozen=True)
class SignalTrack:
    """Per-step speeds; ``values[t]`` covers the step from frame t to t+1."""

    values: np.ndarray
    units: Literal["m/s", "rad/s"]
    source: Literal["left_ee", "right_ee", "neck"]

    def __len__(self):
        return len(self.values)


@dataclasses.dataclass(frozen=True)
class GripperEvents:
    arm: Arm
    event_frames: tuple[int, ...]


def _step_speed(x: np.ndarray, rate_hz: float) -> np.ndarray:
    # forward difference keeps index t aligned with the step that starts at frame t
    return np.linalg.norm(np.diff(x, axis=0), axis=1) * rate_hz


def neck_angular_speed(traj: ActionTrajectory) -> SignalTrack:
    if not traj.layout.head_joints:
        raise LayoutError("layout has no head columns")
    return SignalTrack(_step_speed(traj.head, traj.rate_hz), "rad/s", "neck")


def ee_linear_speed(traj: ActionTrajectory, arm: Arm) -> SignalTrack:
    arm = _check_arm(arm)
    return SignalTrack(_step_speed(traj.ee_pos(arm), traj.rate_hz), "m/s", f"{arm}_ee")


def gripper_sign_changes(g: Sequence[float], hysteresis: float = 0.0) -> list[int]:
    """Frames where the commanded gripper sign flips.

    Zero counts as positive. With ``hysteresis`` h > 0 the state only flips to
    negative below -h and back to positive at or above h.
    """
    if hysteresis < 0:
        raise ValueError("hysteresis must be >= 0")
    g = np.asarray(g, dtype=np.float64)
    if g.size == 0:
        return []
    positive = bool(g[0] >= 0)
    events = []
    for t in range(1, g.size):
        if positive and g[t] < -hysteresis:
            positive = False
            events.append(t)
        elif not positive and g[t] >= hysteresis:
            positive = True
            events.append(t)
    return events


def gripper_events(traj: ActionTrajectory, arm: Arm, hysteresis: float = 0.0) -> GripperEvents:
    arm = _check_arm(arm)
    return GripperEvents(arm, tuple(gripper_sign_changes(traj.gripper(arm), hysteresis)))


def downsample_stride(traj: ActionTrajectory, factor: int) -> ActionTrajectory:
    """Keep frames 0, factor, 2*factor, ... and divide the rate accordingly."""
    if int(factor) != factor or factor < 1:
        raise ValueError(f"stride factor must be a positive integer, got {factor}")
    factor = int(factor)
    if factor == 1:
        return traj
    return ActionTrajectory(traj.data[::factor], traj.rate_hz / factor, traj.layout)


@dataclasses.dataclass(frozen=True)
class DimNorm:
    mean: float
    std: float
    identity_flag: bool = False


@dataclasses.dataclass(frozen=True)
class NormalizationSpec:
    dims: tuple[DimNorm, ...]

    @property
    def identity_dims(self) -> list[int]:
        return [i for i, d in enumerate(self.dims) if d.identity_flag]

    def apply(self, x: np.ndarray) -> np.ndarray:
        mean = np.array([d.mean for d in self.dims])
        std = np.array([d.std for d in self.dims])
        return (np.asarray(x) - mean) / std


def fix_constant_dims(mean: Sequence[float], std: Sequence[float], epsilon: float = 1e-8) -> NormalizationSpec:
    """Replace near-constant dimensions (std < epsilon) by identity normalization.

    Plain mean/std scaling of a locked joint blows tiny eval-time deviations up
    into huge normalized values; flagged dimensions get mean 0, std 1 instead.
    """
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    if mean.shape != std.shape:
        raise ValueError("mean and std must have the same shape")
    if np.any(std < 0):
        raise ValueError("std estimates must be nonnegative")
    dims = []
    for m, s in zip(mean.tolist(), std.tolist()):
        if s < epsilon:
            dims.append(DimNorm(0.0, 1.0, True))
        else:
            dims.append(DimNorm(m, s, False))
    return NormalizationSpec(tuple(dims))
