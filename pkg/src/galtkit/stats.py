"""Success-rate intervals and GALT distribution statistics."""

from __future__ import annotations

import dataclasses
import math
import statistics
from typing import Iterable, Sequence

import numpy as np

from galtkit.detector import GaltOutcome

Z_95 = 1.9599639845400545


def z_for_alpha(alpha: float) -> float:
    """Two-sided normal quantile z_{1 - alpha/2}."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if alpha == 0.05:
        return Z_95
    return statistics.NormalDist().inv_cdf(1 - alpha / 2)


@dataclasses.dataclass(frozen=True)
class ProportionCI:
    successes: int
    trials: int
    point: float
    lo: float
    hi: float
    alpha: float = 0.05

    def as_percent(self) -> tuple[float, float, float]:
        return 100 * self.point, 100 * self.lo, 100 * self.hi

    def display(self) -> str:
        p, lo, hi = self.as_percent()
        return f"{p:.1f} [{lo:.1f}, {hi:.1f}]"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def wilson_ci(successes: int, trials: int, alpha: float = 0.05) -> ProportionCI:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("wilson_ci needs at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must be in [0, {trials}], got {successes}")
    z = z_for_alpha(alpha)
    n = trials
    p = successes / n
    z2 = z * z
    denom = 1 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    # exact endpoints at 0 and n, where the closed form only hits them up to rounding
    lo = 0.0 if successes == 0 else max(0.0, min(p, center - half))
    hi = 1.0 if successes == n else min(1.0, max(p, center + half))
    return ProportionCI(successes, trials, p, lo, hi, alpha)


def suite_mean(cells: Sequence[tuple[int, int]], alpha: float = 0.05) -> ProportionCI:
    """Pooled success rate over per-task (successes, trials) cells.

    All cells must share the same trial count, so the pooled point equals the
    plain task average.
    """
    if not cells:
        raise ValueError("suite_mean needs at least one cell")
    trials = {n for _, n in cells}
    if len(trials) != 1:
        raise ValueError(f"suite_mean requires equal trials per task, got {sorted(trials)}")
    return wilson_ci(sum(k for k, _ in cells), sum(n for _, n in cells), alpha)


@dataclasses.dataclass(frozen=True)
class GaltSummary:
    n_valid: int
    n_total: int
    detection_rate: float | None
    mean_s: float | None
    median_s: float | None
    values: tuple[float, ...]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["values"] = list(self.values)
        return d


def summarize_values(values: Iterable[float], n_total: int) -> GaltSummary:
    vals = tuple(sorted(float(v) for v in values))
    n = len(vals)
    if n > n_total:
        raise ValueError("more valid values than episodes")
    return GaltSummary(
        n_valid=n,
        n_total=n_total,
        detection_rate=n / n_total if n_total else None,
        mean_s=math.fsum(vals) / n if n else None,
        median_s=statistics.median(vals) if n else None,
        values=vals,
    )


def summarize_galt(
    outcomes: Sequence[GaltOutcome],
    value_filter: tuple[float, float] | None = None,
) -> GaltSummary:
    """Detection rate over all outcomes; mean/median over valid values only.

    ``value_filter`` (lo, hi) additionally drops valid values outside the
    closed range, as done for report-level distributions.
    """
    values = [o.galt_s for o in outcomes if o.ok]
    if value_filter is not None:
        lo, hi = value_filter
        values = [v for v in values if lo <= v <= hi]
    return summarize_values(values, len(outcomes))


@dataclasses.dataclass(frozen=True)
class Histogram:
    lo: float
    hi: float
    n_bins: int
    counts: tuple[int, ...]
    n_dropped: int

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.n_bins

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n_bins + 1)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["counts"] = list(self.counts)
        return d


def histogram(values: Iterable[float], lo: float = -0.5, hi: float = 3.5, n_bins: int = 20) -> Histogram:
    """Equal-width bins on [lo, hi]; the last bin includes ``hi``."""
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"invalid histogram range [{lo}, {hi}]")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    v = np.asarray(list(values), dtype=np.float64)
    inside = (v >= lo) & (v <= hi)
    counts, _ = np.histogram(v[inside], bins=n_bins, range=(lo, hi))
    return Histogram(float(lo), float(hi), int(n_bins), tuple(int(c) for c in counts), int(v.size - inside.sum()))


@dataclasses.dataclass(frozen=True)
class MedianDelta:
    median_policy_s: float
    median_ref_s: float
    abs_delta_s: float
    rel_delta: float | None  # None when the reference median is 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def median_delta(policy: GaltSummary, reference: GaltSummary) -> MedianDelta:
    if policy.median_s is None or reference.median_s is None:
        raise ValueError("median_delta needs at least one valid value on each side")
    d = abs(policy.median_s - reference.median_s)
    rel = d / abs(reference.median_s) if reference.median_s != 0 else None
    return MedianDelta(policy.median_s, reference.median_s, d, rel)
