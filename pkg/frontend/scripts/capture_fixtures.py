#!/usr/bin/env python3
"""Capture live API payloads into JSON fixtures for the webapp test suite.

Builds a small deterministic snapshot through the real pipeline, serves it
with the real API app, and writes selected response bodies byte-for-byte
under tests/fixtures/. Rerun after any API change:

    python3 scripts/capture_fixtures.py
"""
from __future__ import annotations

import tempfile
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

from fastapi.testclient import TestClient

from ehc.config import AppConfig, SourceConfig
from ehc.deidentify import PrivacyPolicy
from ehc.geo import load_boundaries
from ehc.ingest import IngestBatch, SensorDeployment, StoryRecord, SurveyRecord
from ehc.pipeline import build_aggregates
from ehc.service import create_app
from ehc.store import write_snapshot

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
BASE_TIME = datetime(2026, 1, 5, tzinfo=timezone.utc)
CATEGORIES = {"anxiety": "psychosocial", "cough": "physical"}


def unit_square(region_id: str, x: int) -> dict:
    ring = [[x, 0], [x + 1, 0], [x + 1, 1], [x, 1], [x, 0]]
    return {
        "type": "Feature",
        "properties": {"ZCTA5CE10": region_id},
        "geometry": {"type": "Polygon", "coordinates": [ring]},
    }


def deployment(
    dep_id: str, sensor_id: str, lon: float, base: float, spike_every: int
) -> SensorDeployment:
    readings = []
    for i in range(240):
        value = base + 25.0 if i % spike_every == 0 else base
        readings.append((BASE_TIME + timedelta(minutes=i), value))
    return SensorDeployment(
        deployment_id=dep_id,
        sensor_id=sensor_id,
        placement="outdoor",
        latitude=0.5,
        longitude=lon,
        readings=tuple(readings),
    )


def survey(resp_id: str, lon: float, cough: bool, anxiety: bool) -> SurveyRecord:
    return SurveyRecord(
        respondent_id=resp_id,
        latitude=0.5,
        longitude=lon,
        survey_date=date(2026, 1, 4),
        symptoms={"cough": cough, "anxiety": anxiety},
        categories=CATEGORIES,
    )


def build_store(root: Path, *, with_health: bool) -> None:
    registry = load_boundaries(
        {
            "type": "FeatureCollection",
            "features": [
                unit_square("15001", 0),
                unit_square("15002", 1),
                unit_square("15003", 2),
            ],
        }
    )
    config = AppConfig(
        sources=(SourceConfig("fixture", "sensor", "http://unused.invalid/fixture.csv"),),
        boundaries_path="unused.geojson",
        privacy=PrivacyPolicy(k_min=1),
        storage_root=str(root),
        digest="webapp-fixture",
    )
    deployments = (
        deployment("d1", "s1", 0.3, 8.0, 120),
        deployment("d2", "s2", 0.6, 10.0, 80),
        deployment("d3", "s3", 1.5, 22.0, 40),
    )
    surveys = (
        (
            survey("r1", 0.3, True, False),
            survey("r2", 0.5, False, True),
            survey("r3", 0.7, False, True),
            survey("r4", 1.4, True, False),
            survey("r5", 1.6, False, False),
        )
        if with_health
        else ()
    )
    stories = (
        StoryRecord(
            story_id="st1",
            region_id="15001",
            title="Dust on the morning walk",
            body="The ridge trail was hazy for a week after the vents opened.",
            image_urls=(
                "https://media.invalid/stories/st1-a.jpg",
                "https://media.invalid/stories/st1-b.jpg",
            ),
            sort_order=1,
        ),
        StoryRecord(
            story_id="st2",
            region_id="15001",
            title="Closing the windows at night",
            body="We tape the seams when the plume drifts over the school.",
            image_urls=(),
            sort_order=2,
        ),
        StoryRecord(
            story_id="st3",
            region_id="15002",
            title="Garden leaves turned spotty",
            body="The ti plants show speckles whenever the air gets sharp.",
            image_urls=("https://media.invalid/stories/st3-a.jpg",),
            sort_order=3,
        ),
    )
    batch = IngestBatch(
        deployments=deployments,
        surveys=surveys,
        stories=stories,
        rejects={},
        fetched_at={"fixture": BASE_TIME},
    )
    snapshot, _report = build_aggregates(config, registry, batch)
    write_snapshot(snapshot, root)


def capture(client: TestClient, out: dict[str, tuple[str, int]]) -> None:
    for name, (url, expected_status) in out.items():
        response = client.get(url)
        if response.status_code != expected_status:
            raise SystemExit(f"{url}: got {response.status_code}, wanted {expected_status}")
        path = FIXTURE_DIR / name
        path.write_bytes(response.content)
        print(f"wrote {path.name} ({len(response.content)} bytes)")


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    registry = load_boundaries(
        {
            "type": "FeatureCollection",
            "features": [
                unit_square("15001", 0),
                unit_square("15002", 1),
                unit_square("15003", 2),
            ],
        }
    )

    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp) / "full"
        build_store(root, with_health=True)
        client = TestClient(create_app(root, registry))
        capture(
            client,
            {
                "metrics.json": ("/api/v1/metrics", 200),
                "regions-air-peaks_per_day.json": (
                    "/api/v1/regions?dataset=air&metric=peaks_per_day",
                    200,
                ),
                "regions-air-mean.json": ("/api/v1/regions?dataset=air&metric=mean", 200),
                "regions-air-max.json": ("/api/v1/regions?dataset=air&metric=max", 200),
                "regions-health-anxiety.json": (
                    "/api/v1/regions?dataset=health&metric=anxiety",
                    200,
                ),
                "region-15001-air.json": ("/api/v1/regions/15001?dataset=air", 200),
                "region-15001-health.json": ("/api/v1/regions/15001?dataset=health", 200),
                "error-region-15003-air.json": ("/api/v1/regions/15003?dataset=air", 404),
                "parallel-air.json": ("/api/v1/parallel?dataset=air", 200),
                "parallel-health.json": ("/api/v1/parallel?dataset=health", 200),
                "stories.json": ("/api/v1/stories", 200),
            },
        )

        air_only = Path(tmp) / "air-only"
        build_store(air_only, with_health=False)
        client = TestClient(create_app(air_only, registry))
        capture(
            client,
            {
                "metrics-air-only.json": ("/api/v1/metrics", 200),
                "parallel-health-empty.json": ("/api/v1/parallel?dataset=health", 200),
                "parallel-air-only.json": ("/api/v1/parallel?dataset=air", 200),
                "stories-air-only.json": ("/api/v1/stories", 200),
                "regions-air-only-peaks.json": (
                    "/api/v1/regions?dataset=air&metric=peaks_per_day",
                    200,
                ),
            },
        )


if __name__ == "__main__":
    main()
