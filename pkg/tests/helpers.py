import numpy as np

from galtkit.trajectory import CANONICAL_LAYOUT, ActionTrajectory


def still_actions(n_frames: int) -> np.ndarray:
    """Canonical-layout matrix: arms at rest, identity quats, head still, grippers open."""
    a = np.zeros((n_frames, CANONICAL_LAYOUT.total_dims))
    a[:, 0:3] = (0.25, 0.20, 1.05)
    a[:, 3] = 1.0
    a[:, 7:10] = (0.25, -0.20, 1.05)
    a[:, 10] = 1.0
    a[:, 15] = 0.3
    a[:, 17:19] = 1.0
    return a


def traj(data, rate_hz=60.0) -> ActionTrajectory:
    return ActionTrajectory(data, rate_hz)
