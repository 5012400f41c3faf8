"""Privacy enforcement: identifier stripping and small-region suppression.

Nothing becomes publishable until it has passed through this module.
Records lose their direct identifiers and exact coordinates, keeping only
region membership; aggregate summaries backed by fewer than ``k_min``
contributors are withheld entirely. Stories are exempt: they are consented
narratives attributed to a region on purpose.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date, datetime
from typing import Mapping, Sequence, TypeVar

from .geo import RegionRegistry, assign_region
from .ingest import SensorDeployment, SurveyRecord

logger = logging.getLogger(__name__)

DEFAULT_K_MIN = 3

SummaryT = TypeVar("SummaryT")


@dataclass(frozen=True)
class PrivacyPolicy:
    """Publication rules: contributor floor and coordinate handling."""

    k_min: int = DEFAULT_K_MIN
    strip_coordinates: bool = True

    def __post_init__(self) -> None:
        if self.k_min < 0:
            raise ValueError("k_min must be >= 0")


@dataclass(frozen=True)
class RegionDeployment:
    """A sensor deployment keyed by region instead of location.

    The hardware sensor_id is gone; coordinates survive only in
    internal-use mode (strip_coordinates disabled).
    """

    deployment_id: str
    region_id: str
    placement: str
    nominal_interval_s: int
    readings: tuple[tuple[datetime, float], ...]
    latitude: float | None = None
    longitude: float | None = None


@dataclass(frozen=True)
class RegionSurvey:
    """A survey response keyed by region, with the respondent id removed."""

    region_id: str
    survey_date: date
    symptoms: Mapping[str, bool]
    categories: Mapping[str, str]
    latitude: float | None = None
    longitude: float | None = None


@dataclass(frozen=True)
class StripResult:
    """Region-keyed records plus the count of records outside every region."""

    deployments: tuple[RegionDeployment, ...]
    surveys: tuple[RegionSurvey, ...]
    dropped: int


def strip_identifiers(
    records: Sequence[SensorDeployment | SurveyRecord],
    registry: RegionRegistry,
    policy: PrivacyPolicy,
) -> StripResult:
    """Replace coordinates with region membership and drop identifiers.

    Records whose location falls outside every region cannot be aggregated
    and are dropped; the drop count is reported so ingest runs can surface
    it. Output preserves input order within each record kind.
    """
    deployments: list[RegionDeployment] = []
    surveys: list[RegionSurvey] = []
    dropped = 0
    for record in records:
        if not isinstance(record, (SensorDeployment, SurveyRecord)):
            raise TypeError(f"cannot strip identifiers from {type(record).__name__}")
        region_id = assign_region(record.latitude, record.longitude, registry)
        if region_id is None:
            dropped += 1
            continue
        keep_coords = not policy.strip_coordinates
        latitude = record.latitude if keep_coords else None
        longitude = record.longitude if keep_coords else None
        if isinstance(record, SensorDeployment):
            deployments.append(
                RegionDeployment(
                    deployment_id=record.deployment_id,
                    region_id=region_id,
                    placement=record.placement,
                    nominal_interval_s=record.nominal_interval_s,
                    readings=record.readings,
                    latitude=latitude,
                    longitude=longitude,
                )
            )
        else:
            surveys.append(
                RegionSurvey(
                    region_id=region_id,
                    survey_date=record.survey_date,
                    symptoms=record.symptoms,
                    categories=record.categories,
                    latitude=latitude,
                    longitude=longitude,
                )
            )
    if dropped:
        logger.warning("%d records fell outside every region and were dropped", dropped)
    return StripResult(
        deployments=tuple(deployments), surveys=tuple(surveys), dropped=dropped
    )


def contributor_count(summary: object) -> int:
    """How many distinct contributors back a summary."""
    for attr in ("n_deployments", "n_respondents"):
        count = getattr(summary, attr, None)
        if count is not None:
            return int(count)
    raise TypeError(f"{type(summary).__name__} carries no contributor count")


def suppress_small_regions(
    summaries: Sequence[SummaryT], policy: PrivacyPolicy
) -> list[SummaryT]:
    """Withhold summaries backed by fewer than k_min contributors.

    Order-preserving and idempotent. Air and health summaries are
    suppressed independently of each other; callers pass one kind at a time.
    """
    return [s for s in summaries if contributor_count(s) >= policy.k_min]
