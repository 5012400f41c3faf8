"""Summary statistics, cross-region normalization, and the color scale.

Per-deployment statistics roll up into per-region summaries (unweighted
mean across deployments), which normalize across regions as z-scores
against the cross-region mean and population standard deviation. Z-scores
drive a piecewise-linear color gradient anchored at fixed standard-deviation
positions, and feed parallel-coordinates matrices for the air and health
datasets.

Everything here is a pure function over immutable inputs; summation always
runs in sorted order so results are bit-identical regardless of input order.
"""

from __future__ import annotations

import logging
import math
import re
import statistics
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Mapping, Sequence

from .errors import EmptyInput, EmptyRegion, InsufficientData
from .geo import RegionRegistry, assign_region

logger = logging.getLogger(__name__)

AIR_METRICS = ("mean", "max", "pct_time_above_threshold", "peaks_per_day")
DATASETS = ("air", "health")

DEFAULT_PEAK_DELTA = 10.0
DEFAULT_MIN_SEPARATION_S = 3600
DEFAULT_PM_THRESHOLD = 35.0

MIN_COVERAGE_DAYS = 1.0 / 24.0  # one hour of sampled time

DEFAULT_COLOR_ANCHORS = (
    (-1.0, "#2ca25f"),  # green
    (-0.5, "#ffff99"),  # yellow
    (0.5, "#fd8d3c"),  # orange
    (1.0, "#e31a1c"),  # red
)

_HEX_RE = re.compile(r"^#[0-9a-fA-F]{6}$")

Reading = tuple[datetime, float]


@dataclass(frozen=True)
class PeakParams:
    """What counts as a peak episode.

    The threshold is baseline-relative: median of the deployment's readings
    plus ``delta``. Runs of at-or-above-threshold readings closer together
    than ``min_separation_s`` merge into one episode.
    """

    delta: float = DEFAULT_PEAK_DELTA
    min_separation_s: int = DEFAULT_MIN_SEPARATION_S
    baseline: str = "median"

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.min_separation_s < 0:
            raise ValueError("min_separation_s must be >= 0")
        if self.baseline != "median":
            raise ValueError("only the median baseline is supported")


@dataclass(frozen=True)
class DeploymentStats:
    deployment_id: str
    mean: float
    max: float
    pct_time_above_threshold: float
    peaks_per_day: float
    coverage_days: float


@dataclass(frozen=True)
class RegionSummary:
    """Per-region aggregate of deployment statistics."""

    region_id: str
    n_deployments: int
    metrics: Mapping[str, float]

    def __post_init__(self) -> None:
        if self.n_deployments < 1:
            raise ValueError("n_deployments must be >= 1")
        missing = [m for m in AIR_METRICS if m not in self.metrics]
        if missing:
            raise ValueError(f"metrics missing {missing}")


@dataclass(frozen=True)
class MetricDistribution:
    """Cross-region mean and population SD for one metric."""

    metric_id: str
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


@dataclass(frozen=True)
class HealthSummary:
    """Per-region symptom prevalence (percent of respondents reporting)."""

    region_id: str
    n_respondents: int
    prevalence: Mapping[str, float]

    def __post_init__(self) -> None:
        if self.n_respondents < 1:
            raise ValueError("n_respondents must be >= 1")
        for name, value in self.prevalence.items():
            if not 0.0 <= value <= 100.0:
                raise ValueError(f"prevalence {name} out of [0, 100]")


@dataclass(frozen=True)
class ColorScale:
    """Ordered (z, hex color) anchors of the legend gradient."""

    anchors: tuple[tuple[float, str], ...] = DEFAULT_COLOR_ANCHORS

    def __post_init__(self) -> None:
        if len(self.anchors) < 2:
            raise ValueError("need at least 2 anchors")
        zs = [z for z, _ in self.anchors]
        if any(b <= a for a, b in zip(zs, zs[1:])):
            raise ValueError("anchor z values must be strictly increasing")
        for _, color in self.anchors:
            if not _HEX_RE.match(color):
                raise ValueError(f"bad hex color {color!r}")

    def position(self, z: float) -> float:
        """Interpolation parameter in [0, 1] along the whole anchor chain.

        Monotone non-decreasing in z; 0 at the first anchor, 1 at the last.
        """
        zs = [anchor_z for anchor_z, _ in self.anchors]
        z = min(max(z, zs[0]), zs[-1])
        for i in range(len(zs) - 1):
            if z <= zs[i + 1]:
                t = (z - zs[i]) / (zs[i + 1] - zs[i])
                return (i + t) / (len(zs) - 1)
        return 1.0


@dataclass(frozen=True)
class PCAxis:
    metric_id: str
    min: float
    max: float


@dataclass(frozen=True)
class PCRow:
    region_id: str
    values: tuple[float, ...]
    normalized: tuple[float, ...]


@dataclass(frozen=True)
class PCMatrix:
    """Parallel-coordinates matrix: one row per region, one axis per metric."""

    dataset: str
    axes: tuple[PCAxis, ...]
    rows: tuple[PCRow, ...]


# --- peak episodes ----------------------------------------------------------


def count_peak_episodes(readings: Sequence[Reading], params: PeakParams) -> int:
    """Count threshold episodes in a time-ordered series.

    Threshold is median(values) + delta. An episode is a maximal run of
    consecutive readings at or above threshold; runs separated by less than
    ``min_separation_s`` merge into one episode.
    """
    if len(readings) < 2:
        raise InsufficientData(f"need >= 2 readings, got {len(readings)}")
    for (t_prev, _), (t_next, _) in zip(readings, readings[1:]):
        if t_next <= t_prev:
            raise ValueError("readings must be strictly increasing in timestamp")
    values = [v for _, v in readings]
    threshold = statistics.median(values) + params.delta

    runs: list[tuple[int, int]] = []  # (start index, end index) inclusive
    start: int | None = None
    for i, value in enumerate(values):
        if value >= threshold:
            if start is None:
                start = i
        elif start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(values) - 1))

    episodes = 0
    previous_end: int | None = None
    for run_start, run_end in runs:
        if previous_end is None:
            episodes += 1
        else:
            gap = (readings[run_start][0] - readings[previous_end][0]).total_seconds()
            if gap >= params.min_separation_s:
                episodes += 1
        previous_end = run_end
    return episodes


# --- deployment statistics ---------------------------------------------------


def compute_deployment_stats(
    deployment: Any, params: PeakParams, pm_threshold: float = DEFAULT_PM_THRESHOLD
) -> DeploymentStats:
    """Summarize one deployment's readings.

    ``deployment`` is anything carrying deployment_id, readings, and
    nominal_interval_s (a raw or de-identified deployment record). Coverage
    is reading count times the nominal sampling interval; below one hour the
    deployment cannot be summarized.
    """
    readings: Sequence[Reading] = deployment.readings
    n = len(readings)
    coverage_days = n * deployment.nominal_interval_s / 86400.0
    if coverage_days < MIN_COVERAGE_DAYS:
        raise InsufficientData(
            f"{deployment.deployment_id}: coverage {coverage_days:.4f} days is below one hour"
        )
    values = [v for _, v in readings]
    mean = math.fsum(values) / n
    peak = max(values)
    above = sum(1 for v in values if v > pm_threshold)
    # A single reading cannot exceed its own median plus a positive delta.
    episodes = count_peak_episodes(readings, params) if n >= 2 else 0
    return DeploymentStats(
        deployment_id=deployment.deployment_id,
        mean=mean,
        max=peak,
        pct_time_above_threshold=100.0 * above / n,
        peaks_per_day=episodes / coverage_days,
        coverage_days=coverage_days,
    )


def aggregate_region(stats: Sequence[DeploymentStats], region_id: str) -> RegionSummary:
    """Aggregate deployment statistics into one region summary.

    Each metric is the unweighted mean across deployments: every deployment
    represents one household's exposure, so long deployments don't get extra
    weight. Permutation-invariant (summation over deployment_id order).
    """
    if not stats:
        raise EmptyRegion(region_id)
    ordered = sorted(stats, key=lambda s: s.deployment_id)
    n = len(ordered)
    metrics = {
        "mean": math.fsum(s.mean for s in ordered) / n,
        "max": math.fsum(s.max for s in ordered) / n,
        "pct_time_above_threshold": math.fsum(s.pct_time_above_threshold for s in ordered) / n,
        "peaks_per_day": math.fsum(s.peaks_per_day for s in ordered) / n,
    }
    return RegionSummary(region_id=region_id, n_deployments=n, metrics=metrics)


# --- cross-region normalization ----------------------------------------------


def compute_zscores(
    values: Mapping[str, float], metric_id: str = ""
) -> tuple[MetricDistribution, dict[str, float]]:
    """Normalize a region->value map against its own mean and population SD.

    Population SD (divide by N): the regions shown are the whole population
    being colored, not a sample. Zero variance (including a single region)
    yields z = 0 everywhere - no relative signal, neutral color.
    """
    if not values:
        raise EmptyInput("cannot normalize an empty value map")
    keys = sorted(values)
    n = len(keys)
    first = values[keys[0]]
    if all(values[k] == first for k in keys):
        dist = MetricDistribution(metric_id=metric_id, mu=first, sigma=0.0)
        return dist, {k: 0.0 for k in keys}
    mu = math.fsum(values[k] for k in keys) / n
    sigma = math.sqrt(math.fsum((values[k] - mu) ** 2 for k in keys) / n)
    if sigma == 0.0:
        zs = {k: 0.0 for k in keys}
    else:
        zs = {k: (values[k] - mu) / sigma for k in keys}
    return MetricDistribution(metric_id=metric_id, mu=mu, sigma=sigma), zs


def zscore_from(dist: MetricDistribution, value: float) -> float:
    """Z of one value under a stored distribution (0 when sigma is 0)."""
    if dist.sigma == 0.0:
        return 0.0
    return (value - dist.mu) / dist.sigma


# --- colors -------------------------------------------------------------------


def colorize(z: float, scale: ColorScale) -> str:
    """Map a z-score to a hex color along the anchor gradient.

    Clamped outside the anchor range; exact anchor positions return the
    configured anchor color byte-exactly; between anchors, channels
    interpolate linearly in RGB (rounding half-up).
    """
    anchors = scale.anchors
    if z <= anchors[0][0]:
        return anchors[0][1]
    if z >= anchors[-1][0]:
        return anchors[-1][1]
    for (z1, c1), (z2, c2) in zip(anchors, anchors[1:]):
        if z == z1:
            return c1
        if z < z2:
            t = (z - z1) / (z2 - z1)
            return _lerp_hex(c1, c2, t)
    return anchors[-1][1]


def _lerp_hex(c1: str, c2: str, t: float) -> str:
    r1, g1, b1 = _parse_hex(c1)
    r2, g2, b2 = _parse_hex(c2)
    channel = lambda a, b: int(a + (b - a) * t + 0.5)  # noqa: E731
    return f"#{channel(r1, r2):02x}{channel(g1, g2):02x}{channel(b1, b2):02x}"


def _parse_hex(color: str) -> tuple[int, int, int]:
    return int(color[1:3], 16), int(color[3:5], 16), int(color[5:7], 16)


# --- parallel coordinates ------------------------------------------------------


def build_pc_matrix(summaries: Sequence[Any], dataset: str) -> PCMatrix:
    """Build the parallel-coordinates matrix for one dataset.

    Air axes are the four deployment metrics in fixed order; health axes are
    the sorted union of symptom names present, with absent symptoms treated
    as zero prevalence. Normalization is min-max per axis, 0.5 when the axis
    is degenerate (all regions equal).
    """
    if dataset not in DATASETS:
        raise ValueError(f"dataset must be one of {DATASETS}")
    if not summaries:
        raise EmptyInput(f"no summaries for dataset {dataset}")
    ordered = sorted(summaries, key=lambda s: s.region_id)
    if dataset == "air":
        axis_ids = list(AIR_METRICS)
        value_of = lambda s, m: float(s.metrics[m])  # noqa: E731
    else:
        names: set[str] = set()
        for summary in ordered:
            names.update(summary.prevalence)
        axis_ids = sorted(names)
        value_of = lambda s, m: float(s.prevalence.get(m, 0.0))  # noqa: E731

    raw_rows = [(s.region_id, [value_of(s, m) for m in axis_ids]) for s in ordered]
    axes = []
    for j, metric_id in enumerate(axis_ids):
        column = [values[j] for _, values in raw_rows]
        axes.append(PCAxis(metric_id=metric_id, min=min(column), max=max(column)))
    rows = []
    for region_id, values in raw_rows:
        normalized = tuple(
            0.5 if axis.max == axis.min else (v - axis.min) / (axis.max - axis.min)
            for v, axis in zip(values, axes)
        )
        rows.append(PCRow(region_id=region_id, values=tuple(values), normalized=normalized))
    return PCMatrix(dataset=dataset, axes=tuple(axes), rows=tuple(rows))


# --- health aggregation ---------------------------------------------------------


@dataclass(frozen=True)
class HealthAggregation:
    summaries: tuple[HealthSummary, ...]
    dropped: int  # respondents outside every region


def aggregate_health(
    surveys: Sequence[Any], registry: RegionRegistry
) -> HealthAggregation:
    """Aggregate survey records into per-region symptom prevalence.

    Each survey is assigned to a region by location; respondents outside all
    regions are dropped and counted. Prevalence of a symptom is the percent
    of the region's respondents reporting it, over the union of symptom
    names seen in that region.
    """
    by_region: dict[str, list[Any]] = {}
    dropped = 0
    for survey in surveys:
        region_id = getattr(survey, "region_id", None)
        if region_id is None:
            region_id = assign_region(survey.latitude, survey.longitude, registry)
        if region_id is None:
            dropped += 1
            continue
        by_region.setdefault(region_id, []).append(survey)
    if dropped:
        logger.warning("%d survey respondents fell outside every region", dropped)
    summaries = []
    for region_id in sorted(by_region):
        group = by_region[region_id]
        names: set[str] = set()
        for survey in group:
            names.update(survey.symptoms)
        n = len(group)
        prevalence = {
            name: 100.0 * sum(1 for s in group if s.symptoms.get(name, False)) / n
            for name in sorted(names)
        }
        summaries.append(
            HealthSummary(region_id=region_id, n_respondents=n, prevalence=prevalence)
        )
    return HealthAggregation(summaries=tuple(summaries), dropped=dropped)
