"""Gaze-action lead time detection and evaluation-protocol tooling."""

__version__ = "0.1.0"

from galtkit.detector import GaltConfig, GaltOutcome, detect_galt, detect_galt_batch  # noqa: E402
from galtkit.protocol import TASKS, check_success, sample_split  # noqa: E402
from galtkit.stats import histogram, median_delta, suite_mean, summarize_galt, wilson_ci  # noqa: E402
from galtkit.synthetic import generate_corpus, generate_episode  # noqa: E402
from galtkit.trajectory import CANONICAL_LAYOUT, ActionLayout, ActionTrajectory, downsample_stride  # noqa: E402

__all__ = [
    "ActionLayout",
    "ActionTrajectory",
    "CANONICAL_LAYOUT",
    "GaltConfig",
    "GaltOutcome",
    "TASKS",
    "check_success",
    "detect_galt",
    "detect_galt_batch",
    "downsample_stride",
    "generate_corpus",
    "generate_episode",
    "histogram",
    "median_delta",
    "sample_split",
    "suite_mean",
    "summarize_galt",
    "wilson_ci",
]
