"""Read-only HTTP API over the latest snapshot.

Every endpoint reads the snapshot store once at entry and answers entirely
from that one snapshot, so no response ever mixes publications; the
snapshot_id is embedded in every payload. Bodies are canonical JSON, which
makes identical queries against an unchanged store byte-identical.

Colors always mean the same thing: for a metric where higher values are
qualitatively better, the z-score's sign is flipped before coloring so the
red end of the scale stays the bad end.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from fastapi import FastAPI
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles

from .canonical import canonical_bytes, quantize
from .errors import CorruptSnapshot, NoSnapshot, StorageUnavailable
from .geo import RegionRegistry, build_feature_collection
from .stats import AIR_METRICS, ColorScale, colorize, zscore_from
from .store import Snapshot, read_latest

JSON_TYPE = "application/json"
GEOJSON_TYPE = "application/geo+json"

_ZIP_RE = re.compile(r"^[0-9]{5}$")

AIR_DESCRIPTORS = (
    ("mean", "Mean PM2.5", "µg/m³"),
    ("max", "Maximum PM2.5", "µg/m³"),
    ("pct_time_above_threshold", "Time above PM2.5 threshold", "% of readings"),
    ("peaks_per_day", "Air quality peaks per day", "episodes/day"),
)


@dataclass(frozen=True)
class MetricDescriptor:
    """Explanatory metadata for one metric, including color direction."""

    id: str
    dataset: str
    label: str
    units: str
    higher_is_worse: bool


class SnapshotUnavailable(Exception):
    """Internal signal that no usable snapshot could be read."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


def create_app(
    storage_root: str | Path,
    registry: RegionRegistry,
    color_scale: ColorScale | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Build the API application over one storage root and region registry."""
    scale = color_scale or ColorScale()
    root = Path(storage_root)
    app = FastAPI(title="Environmental Health Channel API", docs_url=None, redoc_url=None)

    def current_snapshot() -> Snapshot:
        try:
            return read_latest(root)
        except NoSnapshot:
            raise SnapshotUnavailable("no snapshot has been published") from None
        except (CorruptSnapshot, StorageUnavailable) as exc:
            raise SnapshotUnavailable(f"snapshot store unusable: {exc}") from exc

    @app.get("/api/v1/metrics")
    def metrics() -> Response:
        try:
            snapshot = current_snapshot()
        except SnapshotUnavailable as exc:
            return _error(503, "no_snapshot", exc.message)
        descriptors = [
            {
                "id": d.id,
                "dataset": d.dataset,
                "label": d.label,
                "units": d.units,
                "higher_is_worse": d.higher_is_worse,
            }
            for d in all_descriptors(snapshot)
        ]
        return _json({"snapshot_id": snapshot.snapshot_id, "metrics": descriptors})

    @app.get("/api/v1/regions")
    def regions(dataset: str = "air", metric: str = "") -> Response:
        if dataset not in ("air", "health"):
            return _error(400, "bad_dataset", "dataset must be 'air' or 'health'")
        try:
            snapshot = current_snapshot()
        except SnapshotUnavailable as exc:
            return _error(503, "no_snapshot", exc.message)
        descriptor = find_descriptor(snapshot, dataset, metric)
        if descriptor is None:
            return _error(400, "unknown_metric", f"no metric {metric!r} in dataset {dataset}")
        summaries = snapshot.region_summaries if dataset == "air" else snapshot.health_summaries
        zscores, colors = color_regions(snapshot, descriptor, scale)
        document = build_feature_collection(registry, summaries, metric, zscores, colors)
        document["snapshot_id"] = snapshot.snapshot_id
        document["dataset"] = dataset
        return _json(document, media_type=GEOJSON_TYPE)

    @app.get("/api/v1/regions/{zip_code}")
    def region_detail(zip_code: str, dataset: str = "air") -> Response:
        if not _ZIP_RE.match(zip_code):
            return _error(400, "bad_zip", "zip must be exactly 5 digits")
        if dataset not in ("air", "health"):
            return _error(400, "bad_dataset", "dataset must be 'air' or 'health'")
        try:
            snapshot = current_snapshot()
        except SnapshotUnavailable as exc:
            return _error(503, "no_snapshot", exc.message)
        summaries = snapshot.region_summaries if dataset == "air" else snapshot.health_summaries
        summary = next((s for s in summaries if s.region_id == zip_code), None)
        if summary is None:
            return _error(404, "unknown_region", "no published data for that region")
        metrics_block = {}
        for descriptor in all_descriptors(snapshot):
            if descriptor.dataset != dataset:
                continue
            value = _metric_value(summary, descriptor.id)
            dist = snapshot.distributions.get((dataset, descriptor.id))
            z = zscore_from(dist, value) if dist is not None else 0.0
            metrics_block[descriptor.id] = {"value": quantize(value), "z": quantize(z)}
        body: dict[str, Any] = {
            "snapshot_id": snapshot.snapshot_id,
            "region_id": zip_code,
            "dataset": dataset,
            "metrics": metrics_block,
        }
        if dataset == "air":
            body["n_deployments"] = summary.n_deployments
        else:
            body["n_respondents"] = summary.n_respondents
        return _json(body)

    @app.get("/api/v1/parallel")
    def parallel(dataset: str = "air") -> Response:
        if dataset not in ("air", "health"):
            return _error(400, "bad_dataset", "dataset must be 'air' or 'health'")
        try:
            snapshot = current_snapshot()
        except SnapshotUnavailable as exc:
            return _error(503, "no_snapshot", exc.message)
        matrix = snapshot.pc_matrices.get(dataset)
        axes = list(matrix.axes) if matrix else []
        rows = list(matrix.rows) if matrix else []
        return _json(
            {
                "snapshot_id": snapshot.snapshot_id,
                "dataset": dataset,
                "axes": [
                    {"metric_id": a.metric_id, "min": a.min, "max": a.max} for a in axes
                ],
                "rows": [
                    {
                        "region_id": r.region_id,
                        "values": list(r.values),
                        "normalized": list(r.normalized),
                    }
                    for r in rows
                ],
            }
        )

    @app.get("/api/v1/stories")
    def stories() -> Response:
        try:
            snapshot = current_snapshot()
        except SnapshotUnavailable as exc:
            return _error(503, "no_snapshot", exc.message)
        return _json(
            {
                "snapshot_id": snapshot.snapshot_id,
                "stories": [
                    {
                        "story_id": s.story_id,
                        "region_id": s.region_id,
                        "title": s.title,
                        "body": s.body,
                        "image_urls": list(s.image_urls),
                        "sort_order": s.sort_order,
                    }
                    for s in snapshot.stories
                ],
            }
        )

    @app.get("/healthz")
    def healthz() -> Response:
        try:
            snapshot_id = current_snapshot().snapshot_id
        except SnapshotUnavailable:
            snapshot_id = "none"
        return _json({"status": "ok", "snapshot_id": snapshot_id})

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="webapp")
    return app


def all_descriptors(snapshot: Snapshot) -> list[MetricDescriptor]:
    """Stable-ordered descriptors for both datasets of one snapshot.

    Air metrics are fixed; health metrics are the snapshot's published
    symptom set. Every prevalence and every particulate statistic reads as
    worse when higher, so all built-in descriptors point the same way; the
    flag exists so added metrics with the opposite sense stay red-means-worse.
    """
    descriptors = [
        MetricDescriptor(id=i, dataset="air", label=label, units=units, higher_is_worse=True)
        for i, label, units in AIR_DESCRIPTORS
    ]
    health_ids = sorted(
        metric_id for dataset, metric_id in snapshot.distributions if dataset == "health"
    )
    descriptors.extend(
        MetricDescriptor(
            id=metric_id,
            dataset="health",
            label=f"Reporting {metric_id.replace('_', ' ')}",
            units="% of respondents",
            higher_is_worse=True,
        )
        for metric_id in health_ids
    )
    return descriptors


def find_descriptor(snapshot: Snapshot, dataset: str, metric: str) -> MetricDescriptor | None:
    for descriptor in all_descriptors(snapshot):
        if descriptor.dataset == dataset and descriptor.id == metric:
            return descriptor
    return None


def color_regions(
    snapshot: Snapshot, descriptor: MetricDescriptor, scale: ColorScale
) -> tuple[dict[str, float], dict[str, str]]:
    """Z-scores and colors per region for one metric, red meaning worse.

    Z-scores come from the snapshot's stored distribution so they describe
    the published population; the sign flip for higher-is-better metrics
    applies only to coloring, never to the reported z values.
    """
    summaries = (
        snapshot.region_summaries if descriptor.dataset == "air" else snapshot.health_summaries
    )
    dist = snapshot.distributions.get((descriptor.dataset, descriptor.id))
    zscores: dict[str, float] = {}
    colors: dict[str, str] = {}
    for summary in summaries:
        value = _metric_value(summary, descriptor.id)
        z = zscore_from(dist, value) if dist is not None else 0.0
        zscores[summary.region_id] = quantize(z)
        severity = z if descriptor.higher_is_worse else -z
        colors[summary.region_id] = colorize(severity, scale)
    return zscores, colors


def _metric_value(summary: Any, metric_id: str) -> float:
    if hasattr(summary, "metrics"):
        return float(summary.metrics[metric_id])
    return float(summary.prevalence.get(metric_id, 0.0))


def _json(document: dict[str, Any], media_type: str = JSON_TYPE) -> Response:
    return Response(content=canonical_bytes(document), media_type=media_type)


def _error(status: int, code: str, message: str) -> Response:
    body = {"status": status, "code": code, "message": message}
    return Response(content=canonical_bytes(body), media_type=JSON_TYPE, status_code=status)
