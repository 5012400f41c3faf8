"""End-to-end publish pipeline: fetch, de-identify, aggregate, snapshot.

One call runs the whole flow the ingest CLI exposes: sync the configured
sources, strip identifiers against the region registry, compute per-region
statistics for both datasets, suppress small regions, normalize what's
left, and publish an immutable snapshot. Cross-region normalization runs
after suppression on purpose: z-scores describe the regions actually shown,
so a withheld region never shifts the published colors.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .config import AppConfig
from .deidentify import RegionDeployment, strip_identifiers, suppress_small_regions
from .errors import ConfigError, InsufficientData
from .geo import RegionRegistry, load_boundaries
from .ingest import IngestBatch, StoryRecord, run_sync
from .stats import (
    AIR_METRICS,
    HealthSummary,
    MetricDistribution,
    PCMatrix,
    RegionSummary,
    aggregate_health,
    aggregate_region,
    build_pc_matrix,
    compute_deployment_stats,
    compute_zscores,
)
from .store import Snapshot, build_snapshot, write_snapshot

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineReport:
    """What one publish run did, for operator visibility."""

    snapshot: Snapshot
    rejected_rows: int
    source_errors: tuple[str, ...]
    dropped_outside_regions: int
    skipped_deployments: tuple[str, ...]
    dropped_stories: tuple[str, ...]
    suppressed_air_regions: tuple[str, ...]
    suppressed_health_regions: tuple[str, ...]


def load_registry(config: AppConfig) -> RegionRegistry:
    """Load the region boundary file named by the configuration."""
    path = Path(config.boundaries_path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read boundaries {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"boundaries {path} is not valid JSON: {exc}") from exc
    return load_boundaries(doc, region_id_property=config.region_id_property)


def run_pipeline(
    config: AppConfig,
    registry: RegionRegistry | None = None,
    publish: bool = True,
) -> PipelineReport:
    """Fetch everything, build aggregates, and (unless dry-run) publish.

    With publish disabled the snapshot is still built and verified but not
    written, which is what the validate command uses.
    """
    if registry is None:
        registry = load_registry(config)
    batch = run_sync(list(config.sources))
    snapshot, report_parts = build_aggregates(config, registry, batch)
    if publish:
        write_snapshot(snapshot, config.storage_root)
        logger.info("published snapshot %s", snapshot.snapshot_id)
    return PipelineReport(
        snapshot=snapshot,
        rejected_rows=sum(len(rejects) for rejects in batch.rejects.values()),
        source_errors=tuple(f"{e.source_id}: {e.message}" for e in batch.errors),
        **report_parts,
    )


def build_aggregates(
    config: AppConfig, registry: RegionRegistry, batch: IngestBatch
) -> tuple[Snapshot, dict]:
    """Turn one ingest batch into a publishable snapshot."""
    deployments = _filter_placement(batch.deployments, config.placement_mode)
    stripped = strip_identifiers(
        list(deployments) + list(batch.surveys), registry, config.privacy
    )

    by_region: dict[str, list] = {}
    skipped: list[str] = []
    for deployment in stripped.deployments:
        try:
            stats = compute_deployment_stats(
                deployment, config.peak_params, config.pm_threshold_ug_m3
            )
        except InsufficientData as exc:
            skipped.append(deployment.deployment_id)
            logger.warning("skipping deployment: %s", exc)
            continue
        by_region.setdefault(deployment.region_id, []).append(stats)

    region_summaries = [
        aggregate_region(by_region[region_id], region_id) for region_id in sorted(by_region)
    ]
    health = aggregate_health(stripped.surveys, registry)

    published_air = suppress_small_regions(region_summaries, config.privacy)
    published_health = suppress_small_regions(list(health.summaries), config.privacy)
    suppressed_air = [
        s.region_id for s in region_summaries if s not in published_air
    ]
    suppressed_health = [
        s.region_id for s in health.summaries if s not in published_health
    ]

    distributions: dict[tuple[str, str], MetricDistribution] = {}
    if published_air:
        for metric_id in AIR_METRICS:
            dist, _ = compute_zscores(
                {s.region_id: s.metrics[metric_id] for s in published_air}, metric_id
            )
            distributions[("air", metric_id)] = dist
    if published_health:
        for metric_id in sorted({name for s in published_health for name in s.prevalence}):
            dist, _ = compute_zscores(
                {s.region_id: s.prevalence.get(metric_id, 0.0) for s in published_health},
                metric_id,
            )
            distributions[("health", metric_id)] = dist

    pc_matrices = {
        "air": _matrix_or_empty(published_air, "air"),
        "health": _matrix_or_empty(published_health, "health"),
    }

    stories, dropped_stories = _stories_in_registry(batch.stories, registry)

    fetch_times = list(batch.fetched_at.values())
    snapshot = build_snapshot(
        region_summaries=published_air,
        health_summaries=published_health,
        distributions=distributions,
        pc_matrices=pc_matrices,
        stories=stories,
        config_digest=config.digest,
        created_at=max(fetch_times) if fetch_times else None,
    )
    report_parts = {
        "dropped_outside_regions": stripped.dropped + health.dropped,
        "skipped_deployments": tuple(sorted(skipped)),
        "dropped_stories": tuple(dropped_stories),
        "suppressed_air_regions": tuple(suppressed_air),
        "suppressed_health_regions": tuple(suppressed_health),
    }
    return snapshot, report_parts


def _filter_placement(deployments: tuple, placement_mode: str) -> tuple:
    if placement_mode == "combined":
        return deployments
    wanted = "indoor" if placement_mode == "indoor_only" else "outdoor"
    return tuple(d for d in deployments if d.placement == wanted)


def _matrix_or_empty(summaries: list, dataset: str) -> PCMatrix:
    if not summaries:
        return PCMatrix(dataset=dataset, axes=(), rows=())
    return build_pc_matrix(summaries, dataset)


def _stories_in_registry(
    stories: tuple[StoryRecord, ...], registry: RegionRegistry
) -> tuple[tuple[StoryRecord, ...], list[str]]:
    """Keep stories whose region exists; report the rest by id."""
    kept = []
    dropped = []
    for story in stories:
        if story.region_id in registry:
            kept.append(story)
        else:
            dropped.append(story.story_id)
    if dropped:
        logger.warning("dropped %d stories for unknown regions: %s", len(dropped), dropped)
    return tuple(kept), dropped
