"""Procedural id / ood splits and success checking for the benchmark tasks.

Randomness comes from Philox4x64-10 (numpy's counter-based generator) keyed
by ``(seed, stream)``. Stream 0 drives the reset perturbation, stream 1 the
scalar/categorical extras and the prompt index, and stream ``2 + i`` the
i-th object of the region. ``min_separation`` is enforced by placing objects
in order and redrawing each from its own stream until it clears the others.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import math
from pathlib import Path
from typing import Literal, Mapping

import numpy as np

from galtkit.detector import frames_for

Split = Literal["id", "ood-spatial", "ood-init-pose"]
SPLITS: tuple[str, ...] = ("id", "ood-spatial", "ood-init-pose")

MAX_ATTEMPTS = 1000
SIGMA_EE_POS_M = 0.10
SIGMA_NECK_RAD = 0.175  # ~10 deg, yaw and pitch only

STREAM_RESET = 0
STREAM_EXTRAS = 1
STREAM_OBJECT0 = 2


class SamplingError(RuntimeError):
    def __init__(self, task: str, attempts: int):
        super().__init__(f"{task}: could not satisfy min_separation after {attempts} attempts")
        self.attempts = attempts


class MissingChannelError(KeyError):
    pass


def philox(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


@dataclasses.dataclass(frozen=True)
class ObjectRegion:
    """Axis-aligned placement range for one object (metres, yaw in degrees).

    With ``relative_to`` set, ranges are offsets in that object's frame.
    """

    name: str
    x: tuple[float, float]
    y: tuple[float, float]
    yaw_deg: tuple[float, float] = (0.0, 0.0)
    relative_to: str | None = None

    def __post_init__(self):
        for r in (self.x, self.y, self.yaw_deg):
            if r[0] > r[1]:
                raise ValueError(f"{self.name}: empty range {r}")

    @property
    def lows(self) -> np.ndarray:
        return np.array([self.x[0], self.y[0], self.yaw_deg[0]])

    @property
    def highs(self) -> np.ndarray:
        return np.array([self.x[1], self.y[1], self.yaw_deg[1]])

    def contains(self, x: float, y: float, yaw: float, tol: float = 1e-12) -> bool:
        return (
            self.x[0] - tol <= x <= self.x[1] + tol
            and self.y[0] - tol <= y <= self.y[1] + tol
            and self.yaw_deg[0] - tol <= yaw <= self.yaw_deg[1] + tol
        )

    def within(self, other: "ObjectRegion") -> bool:
        return all(o[0] <= s[0] and s[1] <= o[1] for s, o in zip(
            (self.x, self.y, self.yaw_deg), (other.x, other.y, other.yaw_deg)))


def jitter(name: str, x: float, y: float, dx: float, dy: float) -> ObjectRegion:
    return ObjectRegion(name, (x - dx, x + dx), (y - dy, y + dy))


@dataclasses.dataclass(frozen=True)
class RegionSpec:
    objects: tuple[ObjectRegion, ...]
    min_separation: float = 0.0
    scalars: Mapping[str, tuple[float, float]] = dataclasses.field(default_factory=dict)
    choices: Mapping[str, tuple[str, ...]] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.min_separation < 0:
            raise ValueError("min_separation must be >= 0")
        names = [o.name for o in self.objects]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate object names {names}")
        for o in self.objects:
            if o.relative_to is not None and o.relative_to not in names[: names.index(o.name)]:
                raise ValueError(f"{o.name}: relative_to must name an earlier object")
        for k, (lo, hi) in self.scalars.items():
            if lo > hi:
                raise ValueError(f"scalar {k}: empty range")

    def object(self, name: str) -> ObjectRegion:
        for o in self.objects:
            if o.name == name:
                return o
        raise KeyError(name)

    def within(self, other: "RegionSpec") -> bool:
        """Every range of this region lies inside the matching range of ``other``."""
        if [o.name for o in self.objects] != [o.name for o in other.objects]:
            return False
        objs = all(a.within(b) for a, b in zip(self.objects, other.objects))
        scal = all(
            k in other.scalars and other.scalars[k][0] <= lo and hi <= other.scalars[k][1]
            for k, (lo, hi) in self.scalars.items()
        )
        return objs and scal

    def to_dict(self) -> dict:
        return {
            "objects": [dataclasses.asdict(o) for o in self.objects],
            "min_separation": self.min_separation,
            "scalars": {k: list(v) for k, v in self.scalars.items()},
            "choices": {k: list(v) for k, v in self.choices.items()},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RegionSpec":
        objects = tuple(
            ObjectRegion(
                o["name"], tuple(o["x"]), tuple(o["y"]), tuple(o.get("yaw_deg", (0.0, 0.0))), o.get("relative_to")
            )
            for o in d["objects"]
        )
        return cls(
            objects,
            float(d.get("min_separation", 0.0)),
            {k: tuple(v) for k, v in d.get("scalars", {}).items()},
            {k: tuple(v) for k, v in d.get("choices", {}).items()},
        )


@dataclasses.dataclass(frozen=True)
class SuccessCriterion:
    axis: Literal["x", "z"]
    comparator: Literal[">", "<"]
    threshold: float
    target: str = "target"
    ee_speed_max: float = 1.0
    hold_s: float = 0.25
    requires_light: bool = False

    def passes(self, coord: np.ndarray) -> np.ndarray:
        return coord > self.threshold if self.comparator == ">" else coord < self.threshold


@dataclasses.dataclass(frozen=True)
class TaskSpec:
    name: str
    suite: str
    id_region: RegionSpec
    ood_region: RegionSpec
    success: SuccessCriterion
    prompts: tuple[str, ...] = ()

    def region(self, split: str) -> RegionSpec:
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")
        return self.ood_region if split == "ood-spatial" else self.id_region

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "suite": self.suite,
            "id_region": self.id_region.to_dict(),
            "ood_region": self.ood_region.to_dict(),
            "success": dataclasses.asdict(self.success),
            "prompts": list(self.prompts),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TaskSpec":
        return cls(
            d["name"],
            d.get("suite", ""),
            RegionSpec.from_dict(d["id_region"]),
            RegionSpec.from_dict(d["ood_region"]),
            SuccessCriterion(**d["success"]),
            tuple(d.get("prompts", ())),
        )


@dataclasses.dataclass(frozen=True)
class ResetPerturbation:
    ee_left_delta: tuple[float, float, float]
    ee_right_delta: tuple[float, float, float]
    neck_yaw_delta: float
    neck_pitch_delta: float


@dataclasses.dataclass(frozen=True)
class SplitSample:
    task: str
    split: str
    seed: int
    object_poses: Mapping[str, tuple[float, float, float]]  # x, y, yaw_deg (world)
    scalars: Mapping[str, float] = dataclasses.field(default_factory=dict)
    choices: Mapping[str, str] = dataclasses.field(default_factory=dict)
    reset_perturbation: ResetPerturbation | None = None
    prompt_index: int | None = None
    attempts: int = 1

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["object_poses"] = {k: list(v) for k, v in self.object_poses.items()}
        d["scalars"] = dict(self.scalars)
        d["choices"] = dict(self.choices)
        return d


def _world_pose(offset: np.ndarray, parent: tuple[float, float, float]) -> tuple[float, float, float]:
    px, py, pyaw = parent
    c, s = math.cos(math.radians(pyaw)), math.sin(math.radians(pyaw))
    dx, dy, dyaw = offset
    return (px + c * dx - s * dy, py + s * dx + c * dy, pyaw + dyaw)


def local_pose(pose: tuple[float, float, float], parent: tuple[float, float, float]) -> tuple[float, float, float]:
    """Inverse of the parent-frame placement used for ``relative_to`` objects."""
    px, py, pyaw = parent
    c, s = math.cos(math.radians(pyaw)), math.sin(math.radians(pyaw))
    wx, wy = pose[0] - px, pose[1] - py
    return (c * wx + s * wy, -s * wx + c * wy, pose[2] - pyaw)


def min_pairwise_distance(region: RegionSpec, poses: Mapping[str, tuple[float, float, float]]) -> float:
    pts = [poses[o.name][:2] for o in region.objects if o.relative_to is None]
    best = math.inf
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            best = min(best, math.dist(pts[i], pts[j]))
    return best


def region_contains(region: RegionSpec, sample: SplitSample) -> bool:
    for o in region.objects:
        pose = sample.object_poses[o.name]
        if o.relative_to is not None:
            pose = local_pose(pose, sample.object_poses[o.relative_to])
        if not o.contains(*pose, tol=1e-9):
            return False
    if region.min_separation > 0 and min_pairwise_distance(region, sample.object_poses) < region.min_separation:
        return False
    return all(lo <= sample.scalars[k] <= hi for k, (lo, hi) in region.scalars.items())


def _first_clear(g: np.random.Generator, o: ObjectRegion, placed: np.ndarray, sep: float, chunk: int = 32):
    """First of up to MAX_ATTEMPTS draws at least ``sep`` from every placed point."""
    sep2 = sep * sep
    for _ in range(0, MAX_ATTEMPTS, chunk):
        cand = g.uniform(o.lows, o.highs, size=(chunk, 3))
        d2 = ((cand[:, None, :2] - placed[None]) ** 2).sum(-1)
        ok = np.flatnonzero((d2 >= sep2).all(axis=1))
        if ok.size:
            return cand[ok[0]]
    return None


def _place(region: RegionSpec, streams: list[np.random.Generator], free: list[bool]) -> list[np.ndarray] | None:
    """One placement pass; None if some object has no valid draw among its candidates."""
    raw: list[np.ndarray] = []
    placed: list[np.ndarray] = []
    for g, o, is_free in zip(streams, region.objects, free):
        if not is_free or region.min_separation <= 0 or not placed:
            r = g.uniform(o.lows, o.highs)
        else:
            r = _first_clear(g, o, np.asarray(placed), region.min_separation)
            if r is None:
                return None
        raw.append(r)
        if is_free:
            placed.append(r[:2])
    return raw


def sample_split(task: TaskSpec, split: str, seed: int) -> SplitSample:
    region = task.region(split)
    streams = [philox(seed, STREAM_OBJECT0 + i) for i in range(len(region.objects))]
    free = [o.relative_to is None for o in region.objects]

    # Objects are placed in order, each redrawn until it clears the ones
    # already placed. A scene whose later object cannot fit is restarted.
    # Joint rejection would need ~3000 draws for the 5-object 10x50 cm strip.
    for attempt in range(1, MAX_ATTEMPTS + 1):
        raw = _place(region, streams, free)
        if raw is not None:
            break
    else:
        raise SamplingError(task.name, MAX_ATTEMPTS)

    poses: dict[str, tuple[float, float, float]] = {}
    for o, r in zip(region.objects, raw):
        if o.relative_to is None:
            poses[o.name] = (float(r[0]), float(r[1]), float(r[2]))
        else:
            poses[o.name] = _world_pose(r, poses[o.relative_to])

    extras = philox(seed, STREAM_EXTRAS)
    scalars = {k: float(extras.uniform(lo, hi)) for k, (lo, hi) in region.scalars.items()}
    choices = {k: str(opts[int(extras.integers(len(opts)))]) for k, opts in region.choices.items()}
    prompt_index = int(extras.integers(len(task.prompts))) if len(task.prompts) > 1 else None

    reset = None
    if split == "ood-init-pose":
        g = philox(seed, STREAM_RESET)
        ee = g.normal(0.0, SIGMA_EE_POS_M, size=6)
        neck = g.normal(0.0, SIGMA_NECK_RAD, size=2)
        reset = ResetPerturbation(
            tuple(float(v) for v in ee[:3]), tuple(float(v) for v in ee[3:]), float(neck[0]), float(neck[1])
        )

    return SplitSample(task.name, split, int(seed), poses, scalars, choices, reset, prompt_index, attempt)


@dataclasses.dataclass(frozen=True, eq=False)
class SceneStateTrack:
    """Logged scene state: object positions (T x 3, metres) and EE speeds (T x 2, m/s)."""

    rate_hz: float
    objects: Mapping[str, np.ndarray]
    ee_speeds: np.ndarray
    light_green: np.ndarray | None = None

    def __post_init__(self):
        if not self.rate_hz > 0:
            raise ValueError("rate_hz must be positive")
        ee = np.asarray(self.ee_speeds, dtype=np.float64)
        if ee.ndim == 1:
            ee = ee[:, None]
        object.__setattr__(self, "ee_speeds", ee)
        for k, v in self.objects.items():
            if np.asarray(v).shape != (ee.shape[0], 3):
                raise ValueError(f"object {k!r} has shape {np.shape(v)}, expected ({ee.shape[0]}, 3)")

    @property
    def n_frames(self) -> int:
        return self.ee_speeds.shape[0]


@dataclasses.dataclass(frozen=True)
class SuccessResult:
    success: bool
    first_frame: int | None = None
    first_time_s: float | None = None


def check_success(task: TaskSpec | SuccessCriterion, track: SceneStateTrack) -> SuccessResult:
    """Earliest ``hold_s`` window where the target passes its threshold and both arms are slow."""
    crit = task.success if isinstance(task, TaskSpec) else task
    if crit.target not in track.objects:
        raise MissingChannelError(f"track has no channel for target object {crit.target!r}")
    n = max(1, frames_for(crit.hold_s, track.rate_hz))
    if track.n_frames < n:
        raise ValueError(f"track has {track.n_frames} frames, hold window needs {n}")
    coord = np.asarray(track.objects[crit.target])[:, "xyz".index(crit.axis)]
    ok = crit.passes(coord) & np.all(track.ee_speeds < crit.ee_speed_max, axis=1)
    if crit.requires_light and track.light_green is not None:
        ok &= np.asarray(track.light_green, dtype=bool)
    # windows of n consecutive passing frames
    window_hits = np.convolve(ok.astype(np.int64), np.ones(n, dtype=np.int64), mode="valid") == n
    starts = np.flatnonzero(window_hits)
    if starts.size == 0:
        return SuccessResult(False)
    t = int(starts[0])
    return SuccessResult(True, t, t / track.rate_hz)


# ---- built-in task registry ----

# Only region sizes are fixed by the task table; centres are placed in the
# hip-centred frame in front of the robot.
TABLE_X = 0.45
SHELF_X = 0.60
SHELF_HEIGHTS_M = (0.97, 1.10, 1.27)
YCB_OBJECTS = ("soup_can", "meat_can", "tuna_can", "gelatin_box", "pudding_box")

_LIFT_PHRASES = {
    "soup_can": ("Pick up the tomato soup can and lift it.", "Grasp the soup can and hold it up.",
                 "Lift the red soup can off the table."),
    "meat_can": ("Pick up the potted meat can and lift it.", "Grasp the can of spam and hold it up.",
                 "Lift the meat can off the table."),
    "tuna_can": ("Pick up the tuna fish can and lift it.", "Grasp the tuna can and hold it up.",
                 "Lift the tuna fish can off the table."),
    "gelatin_box": ("Pick up the gelatin box and lift it.", "Grasp the gelatin box and hold it up.",
                    "Lift the gelatin box off the table."),
    "pudding_box": ("Pick up the pudding box and lift it.", "Grasp the pudding box and hold it up.",
                    "Lift the pudding box off the table."),
}
_SHELF_PHRASES = {
    "soup_can": ("Find the tomato soup can on the shelf and bring it to me.", "Retrieve the soup can from the shelves.",
                 "Look through the shelves, find the red soup can, and take it."),
    "meat_can": ("Find the potted meat can on the shelf and bring it to me.", "Retrieve the spam can from the shelves.",
                 "Look through the shelves, find the meat can, and take it."),
    "tuna_can": ("Find the tuna fish can on the shelf and bring it to me.", "Retrieve the tuna can from the shelves.",
                 "Look through the shelves, find the tuna can, and take it."),
    "gelatin_box": ("Find the gelatin box on the shelf and bring it to me.",
                    "Retrieve the gelatin box from the shelves.",
                    "Look through the shelves, find the gelatin box, and take it."),
    "pudding_box": ("Find the pudding box on the shelf and bring it to me.",
                    "Retrieve the pudding box from the shelves.",
                    "Look through the shelves, find the pudding box, and take it."),
}

# slot centres (x, y) and shelf index per object
SHELF_SLOTS = ((SHELF_X, -0.12, 0), (SHELF_X, 0.12, 0), (SHELF_X, 0.0, 1), (SHELF_X, -0.12, 2), (SHELF_X, 0.12, 2))


def prompt_target(task: TaskSpec, prompt_index: int) -> str:
    """Object named by an object-conditional prompt (3 phrasings per object)."""
    return YCB_OBJECTS[prompt_index // 3]


def _rect(name: str, dx_cm: float, dy_cm: float, x: float = TABLE_X, y: float = 0.0) -> ObjectRegion:
    """``dx_cm x dy_cm`` rectangle centred on (x, y)."""
    return jitter(name, x, y, dx_cm / 200, dy_cm / 200)


def _clutter(sep: float, dx_cm: float, dy_cm: float, names: tuple[str, ...]) -> RegionSpec:
    return RegionSpec(tuple(_rect(n, dx_cm, dy_cm) for n in names), min_separation=sep)


def _builtin_tasks() -> dict[str, TaskSpec]:
    z12 = SuccessCriterion("z", ">", 1.2)
    z125 = SuccessCriterion("z", ">", 1.25)
    cube_names = ("cube", "distractor_1", "distractor_2", "distractor_3", "distractor_4")
    clutter_id = _clutter(0.10, 10, 50, cube_names)
    clutter_ood = _clutter(0.05, 20, 70, cube_names)
    lift_prompts = tuple(p for o in YCB_OBJECTS for p in _LIFT_PHRASES[o])
    shelf_prompts = tuple(p for o in YCB_OBJECTS for p in _SHELF_PHRASES[o])

    tasks = [
        TaskSpec(
            "conditional-pick", "head",
            RegionSpec(
                (_rect("left_object", 10, 10, y=0.20), _rect("right_object", 10, 10, y=-0.20), _rect("card", 10, 10)),
                choices={"card_color": ("red", "green")},
            ),
            RegionSpec(
                (_rect("left_object", 20, 25, y=0.22), _rect("right_object", 20, 25, y=-0.22), _rect("card", 20, 16)),
                choices={"card_color": ("red", "green")},
            ),
            z12,
            ("Look at the card. If it is red, pick the object on the left. "
             "If it is green, pick the object on the right.",),
        ),
        TaskSpec(
            "wait-then-act", "head",
            RegionSpec((_rect("object", 10, 24), _rect("light", 10, 20, x=0.65)), scalars={"cue_delay_s": (2.0, 5.0)}),
            RegionSpec((_rect("object", 20, 40), _rect("light", 20, 30, x=0.65)), scalars={"cue_delay_s": (2.0, 8.0)}),
            dataclasses.replace(z12, requires_light=True),
            ("Watch the red light. When it turns green, pick up the object.",),
        ),
        TaskSpec("clutter-pick-cube", "head", clutter_id, clutter_ood, z12, ("Find the red cube and pick it up.",)),
        TaskSpec(
            "clutter-pick-lift", "head",
            _clutter(0.10, 10, 50, YCB_OBJECTS), _clutter(0.05, 20, 70, YCB_OBJECTS), z12, lift_prompts,
        ),
        TaskSpec(
            "multi-shelf-scan", "head",
            RegionSpec(tuple(jitter(n, x, y, 0.03, 0.03) for n, (x, y, _) in zip(YCB_OBJECTS, SHELF_SLOTS))),
            RegionSpec(tuple(jitter(n, x, y, 0.03, 0.10) for n, (x, y, _) in zip(YCB_OBJECTS, SHELF_SLOTS))),
            SuccessCriterion("x", "<", 0.46),
            shelf_prompts,
        ),
        TaskSpec(
            "peeking-box", "hands",
            RegionSpec(
                (ObjectRegion("box", (TABLE_X - 0.02, TABLE_X + 0.02), (-0.04, 0.04), (-5.0, 5.0)),
                 ObjectRegion("object", (-0.04, 0.04), (-0.02, 0.02), relative_to="box")),
                choices={"open_side": ("left", "right")},
            ),
            RegionSpec(
                (ObjectRegion("box", (TABLE_X - 0.04, TABLE_X + 0.04), (-0.04, 0.04), (-10.0, 10.0)),
                 ObjectRegion("object", (-0.04, 0.04), (-0.04, 0.04), relative_to="box")),
                choices={"open_side": ("left", "right")},
            ),
            z125,
            ("Retrieve the object from inside the box.",),
        ),
        TaskSpec(
            "occluded-reach", "hands",
            RegionSpec((_rect("object", 10, 40),)),
            RegionSpec((_rect("object", 17, 60),)),
            z125,
            ("Reach around the screen and pick up the object behind it.",),
        ),
        TaskSpec(
            "blocked-clutter-pick-cube", "hands", clutter_id, clutter_ood, z12, ("Find the red cube and pick it up.",)
        ),
    ]
    return {t.name: t for t in tasks}


TASKS: dict[str, TaskSpec] = _builtin_tasks()


def get_task(name: str, registry: Mapping[str, TaskSpec] | None = None) -> TaskSpec:
    registry = TASKS if registry is None else registry
    try:
        return registry[name]
    except KeyError:
        raise KeyError(f"unknown task {name!r}; known: {sorted(registry)}") from None


def _merge(base: dict, override: Mapping) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        out[k] = _merge(out[k], v) if isinstance(v, Mapping) and isinstance(out.get(k), dict) else v
    return out


def load_task_registry(path: str | Path, base: Mapping[str, TaskSpec] | None = None) -> dict[str, TaskSpec]:
    """Built-in tasks overridden/extended by a JSON file ``{"tasks": {name: {...}}}``.

    Entries for known tasks are merged field by field; new names must be
    complete task records.
    """
    base = dict(TASKS if base is None else base)
    doc = json.loads(Path(path).read_text())
    for name, fields in doc.get("tasks", {}).items():
        record = _merge(base[name].to_dict(), fields) if name in base else dict(fields, name=name)
        record["name"] = name
        base[name] = TaskSpec.from_dict(record)
    return base
