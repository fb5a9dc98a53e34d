"""Episode files: a directory holding ``episode.json`` plus an action matrix.

See docs/FORMATS.md for the byte-level layout.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Iterator, Literal, Mapping

import numpy as np

from galtkit.trajectory import CANONICAL_LAYOUT, ActionLayout, ActionTrajectory, LayoutError

FORMAT_VERSION = 1
META_NAME = "episode.json"
CSV_NAME = "actions.csv"
BIN_NAME = "actions.bin"
Encoding = Literal["csv", "bin"]


class EpisodeFormatError(ValueError):
    """Base class for unreadable episode files."""


class ParseError(EpisodeFormatError):
    def __init__(self, path: str | Path, message: str, line: int | None = None):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class SchemaError(EpisodeFormatError):
    def __init__(self, path: str | Path, message: str):
        self.path = str(path)
        super().__init__(f"{self.path}: {message}")


@dataclasses.dataclass(frozen=True)
class EpisodeMeta:
    episode_id: str
    rate_hz: float
    n_frames: int
    n_dims: int
    task: str = ""
    robot: str = ""
    layout: ActionLayout = CANONICAL_LAYOUT
    prompt: str | None = None
    success: bool | None = None
    encoding: Encoding = "csv"
    extra: Mapping[str, Any] = dataclasses.field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "episode_id": self.episode_id,
            "task": self.task,
            "robot": self.robot,
            "rate_hz": self.rate_hz,
            "n_frames": self.n_frames,
            "n_dims": self.n_dims,
            "layout": self.layout.to_dict(),
            "prompt": self.prompt,
            "success": self.success,
            "encoding": self.encoding,
            "extra": dict(self.extra),
        }


@dataclasses.dataclass(frozen=True, eq=False)
class EpisodeFile:
    meta: EpisodeMeta
    actions: np.ndarray

    @classmethod
    def from_trajectory(cls, episode_id: str, traj: ActionTrajectory, **meta) -> "EpisodeFile":
        m = EpisodeMeta(
            episode_id=episode_id,
            rate_hz=traj.rate_hz,
            n_frames=traj.n_frames,
            n_dims=traj.data.shape[1],
            layout=traj.layout,
            **meta,
        )
        return cls(m, traj.data)

    def trajectory(self) -> ActionTrajectory:
        return ActionTrajectory(self.actions, self.meta.rate_hz, self.meta.layout)


def _format_row(row: np.ndarray) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return ",".join(repr(float(v)) for v in row)


def write_episode(ep: EpisodeFile, path: str | Path, encoding: Encoding | None = None) -> Path:
    path = Path(path)
    encoding = encoding or ep.meta.encoding
    if encoding not in ("csv", "bin"):
        raise ValueError(f"unknown encoding {encoding!r}")
    actions = np.asarray(ep.actions, dtype=np.float64)
    if actions.shape != (ep.meta.n_frames, ep.meta.n_dims):
        raise SchemaError(path, f"matrix shape {actions.shape} does not match metadata")
    if not np.all(np.isfinite(actions)):
        raise SchemaError(path, "action matrix contains non-finite values")
    path.mkdir(parents=True, exist_ok=True)
    meta = dataclasses.replace(ep.meta, encoding=encoding)
    (path / META_NAME).write_text(json.dumps(meta.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if encoding == "csv":
        lines = [_format_row(r) for r in actions]
        (path / CSV_NAME).write_text("\n".join(lines) + "\n", encoding="ascii")
        (path / BIN_NAME).unlink(missing_ok=True)
    else:
        (path / BIN_NAME).write_bytes(actions.astype("<f8").tobytes(order="C"))
        (path / CSV_NAME).unlink(missing_ok=True)
    return path


def _parse_meta(path: Path, raw: Mapping) -> EpisodeMeta:
    required = ("episode_id", "rate_hz", "n_frames", "n_dims")
    missing = [k for k in required if k not in raw]
    if missing:
        raise SchemaError(path, f"metadata missing {missing}")
    version = raw.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise SchemaError(path, f"unsupported format_version {version}")
    try:
        layout = ActionLayout.from_dict(raw["layout"]) if "layout" in raw else CANONICAL_LAYOUT
    except LayoutError as e:
        raise SchemaError(path, f"bad layout descriptor: {e}") from e
    rate = raw["rate_hz"]
    if not isinstance(rate, (int, float)) or isinstance(rate, bool) or not (math.isfinite(rate) and rate > 0):
        raise SchemaError(path, f"rate_hz must be a positive number, got {rate!r}")
    for k in ("n_frames", "n_dims"):
        if not isinstance(raw[k], int) or isinstance(raw[k], bool) or raw[k] < 1:
            raise SchemaError(path, f"{k} must be a positive integer, got {raw[k]!r}")
    if raw["n_dims"] != layout.total_dims:
        raise SchemaError(path, f"n_dims={raw['n_dims']} but layout has total_dims={layout.total_dims}")
    encoding = raw.get("encoding", "csv")
    if encoding not in ("csv", "bin"):
        raise SchemaError(path, f"unknown encoding {encoding!r}")
    return EpisodeMeta(
        episode_id=str(raw["episode_id"]),
        rate_hz=float(rate),
        n_frames=raw["n_frames"],
        n_dims=raw["n_dims"],
        task=raw.get("task", ""),
        robot=raw.get("robot", ""),
        layout=layout,
        prompt=raw.get("prompt"),
        success=raw.get("success"),
        encoding=encoding,
        extra=raw.get("extra", {}),
    )


def _parse_csv(path: Path, n_dims: int | None, skip_header: bool = False) -> np.ndarray:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            if skip_header and lineno == 1:
                try:
                    float(rec[0])
                except ValueError:
                    continue
            if n_dims is None:
                n_dims = len(rec)
            if len(rec) != n_dims:
                raise SchemaError(path, f"line {lineno}: expected {n_dims} columns, got {len(rec)}")
            try:
                row = [float(v) for v in rec]
            except ValueError as e:
                raise ParseError(path, str(e), lineno) from e
            if not all(map(math.isfinite, row)):
                raise ParseError(path, "non-finite value", lineno)
            rows.append(row)
    if not rows:
        raise ParseError(path, "no data rows")
    return np.array(rows, dtype=np.float64)


def read_episode(path: str | Path) -> EpisodeFile:
    path = Path(path)
    meta_path = path / META_NAME
    try:
        text = meta_path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise ParseError(meta_path, "missing episode metadata") from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(meta_path, e.msg, e.lineno) from e
    if not isinstance(raw, dict):
        raise SchemaError(meta_path, "metadata must be a JSON object")
    meta = _parse_meta(meta_path, raw)

    matrix_path = path / (CSV_NAME if meta.encoding == "csv" else BIN_NAME)
    if not matrix_path.is_file():
        raise ParseError(matrix_path, "missing action matrix")
    if meta.encoding == "csv":
        actions = _parse_csv(matrix_path, meta.n_dims)
    else:
        bin_path = matrix_path
        blob = bin_path.read_bytes()
        expect = meta.n_frames * meta.n_dims * 8
        if len(blob) != expect:
            raise SchemaError(bin_path, f"expected {expect} bytes, got {len(blob)}")
        actions = np.frombuffer(blob, dtype="<f8").reshape(meta.n_frames, meta.n_dims).astype(np.float64)
        if not np.all(np.isfinite(actions)):
            raise ParseError(bin_path, "non-finite value", int(np.argwhere(~np.isfinite(actions))[0, 0]) + 1)
    if actions.shape != (meta.n_frames, meta.n_dims):
        raise SchemaError(path, f"matrix is {actions.shape}, metadata declares ({meta.n_frames}, {meta.n_dims})")
    actions.flags.writeable = False
    return EpisodeFile(meta, actions)


def read_actions_csv(
    path: str | Path,
    rate_hz: float,
    layout: ActionLayout = CANONICAL_LAYOUT,
) -> ActionTrajectory:
    """Bare CSV matrix (one frame per line, optional header line) as a trajectory."""
    data = _parse_csv(Path(path), layout.total_dims, skip_header=True)
    return ActionTrajectory(data, rate_hz, layout)


def episode_digest(path: str | Path) -> str:
    """sha256 over the metadata bytes followed by the matrix bytes."""
    path = Path(path)
    h = hashlib.sha256()
    for name in (META_NAME, CSV_NAME, BIN_NAME):
        p = path / name
        if p.exists():
            h.update(name.encode())
            h.update(b"\0")
            h.update(p.read_bytes())
    return h.hexdigest()


def find_episodes(root: str | Path) -> list[Path]:
    """Episode directories under ``root`` (or ``root`` itself), sorted by path."""
    root = Path(root)
    if not root.exists():
        raise FileNotFoundError(f"no such path: {root}")
    if (root / META_NAME).exists():
        return [root]
    return sorted(p.parent for p in root.rglob(META_NAME))


def iter_lerobot_episodes(
    parquet_path: str | Path,
    rate_hz: float,
    layout: ActionLayout = CANONICAL_LAYOUT,
    action_column: str = "action",
    episode_column: str = "episode_index",
    columns: list[str] | None = None,
) -> Iterator[EpisodeFile]:
    """Episodes from a LeRobot-style parquet table (needs the ``lerobot`` extra).

    Actions are either one list-valued ``action_column`` or, when ``columns``
    is given, that many scalar columns taken in order. Layout indices refer
    to the resulting column order.
    """
    try:
        import pyarrow.parquet as pq
    except ImportError as e:  # pragma: no cover - depends on the environment
        raise ImportError("reading parquet needs pyarrow: pip install 'artifact[lerobot]'") from e

    path = Path(parquet_path)
    table = pq.read_table(path)
    names = table.column_names
    if episode_column not in names:
        raise SchemaError(path, f"no {episode_column!r} column; have {names}")
    if columns:
        missing = [c for c in columns if c not in names]
        if missing:
            raise SchemaError(path, f"missing action columns {missing}")
        mat = np.column_stack([table.column(c).to_numpy(zero_copy_only=False) for c in columns]).astype(np.float64)
    else:
        if action_column not in names:
            raise SchemaError(path, f"no {action_column!r} column; have {names}")
        mat = np.array(table.column(action_column).to_pylist(), dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != layout.total_dims:
        raise SchemaError(path, f"action width {mat.shape[1:]} does not match layout total_dims={layout.total_dims}")
    ep_idx = table.column(episode_column).to_numpy(zero_copy_only=False)
    for e in sorted(set(ep_idx.tolist())):
        rows = mat[ep_idx == e]
        traj = ActionTrajectory(rows, rate_hz, layout)
        yield EpisodeFile.from_trajectory(f"{path.stem}-{int(e):06d}", traj)
