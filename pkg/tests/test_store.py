"""Content-addressed snapshot persistence and integrity checking."""

from __future__ import annotations

import json
from datetime import datetime, timezone

import pytest

from ehc.canonical import canonical_bytes
from ehc.errors import CorruptSnapshot, HashMismatch, NoSnapshot, StorageUnavailable
from ehc.ingest import StoryRecord
from ehc.stats import HealthSummary, MetricDistribution, PCMatrix, RegionSummary
from ehc.store import (
    Snapshot,
    build_snapshot,
    read_latest,
    snapshot_document,
    snapshot_id_of,
    write_snapshot,
)

CREATED = datetime(2026, 2, 1, 12, 0, tzinfo=timezone.utc)


def make_snapshot(mean=12.3456789, stories=(), created_at=CREATED) -> Snapshot:
    summaries = [
        RegionSummary(
            region_id="15001",
            n_deployments=3,
            metrics={
                "mean": mean,
                "max": 40.0,
                "pct_time_above_threshold": 7.5,
                "peaks_per_day": 1.25,
            },
        )
    ]
    health = [HealthSummary(region_id="15001", n_respondents=4, prevalence={"cough": 25.0})]
    distributions = {
        ("air", "mean"): MetricDistribution(metric_id="mean", mu=mean, sigma=0.0),
        ("health", "cough"): MetricDistribution(metric_id="cough", mu=25.0, sigma=0.0),
    }
    matrices = {
        "air": PCMatrix(dataset="air", axes=(), rows=()),
        "health": PCMatrix(dataset="health", axes=(), rows=()),
    }
    return build_snapshot(
        region_summaries=summaries,
        health_summaries=health,
        distributions=distributions,
        pc_matrices=matrices,
        stories=tuple(stories),
        config_digest="cfg-digest",
        created_at=created_at,
    )


def test_write_then_read_latest_round_trip(tmp_path):
    snapshot = make_snapshot()
    write_snapshot(snapshot, tmp_path)
    loaded = read_latest(tmp_path)
    assert loaded == snapshot


def test_quantization_happens_at_build():
    snapshot = make_snapshot(mean=12.3456789)
    assert snapshot.region_summaries[0].metrics["mean"] == 12.345679


def test_same_contents_same_id_single_file(tmp_path):
    first = make_snapshot(created_at=datetime(2026, 2, 1, tzinfo=timezone.utc))
    second = make_snapshot(created_at=datetime(2026, 3, 15, tzinfo=timezone.utc))
    assert first.snapshot_id == second.snapshot_id
    write_snapshot(first, tmp_path)
    before = (tmp_path / f"{first.snapshot_id}.json").read_bytes()
    write_snapshot(second, tmp_path)
    after = (tmp_path / f"{first.snapshot_id}.json").read_bytes()
    assert before == after  # dedup keeps the original byte-identical file
    stored = [p for p in tmp_path.iterdir() if p.suffix == ".json"]
    assert len(stored) == 1


def test_latest_pointer_moves_to_newest(tmp_path):
    a = make_snapshot(mean=1.0)
    b = make_snapshot(mean=2.0)
    write_snapshot(a, tmp_path)
    write_snapshot(b, tmp_path)
    assert read_latest(tmp_path).snapshot_id == b.snapshot_id
    assert (tmp_path / "latest").read_text() == b.snapshot_id


def test_empty_store_raises_no_snapshot(tmp_path):
    with pytest.raises(NoSnapshot):
        read_latest(tmp_path)


def test_unwritable_root_raises_storage_unavailable(tmp_path):
    blocking_file = tmp_path / "occupied"
    blocking_file.write_text("not a directory")
    with pytest.raises(StorageUnavailable):
        write_snapshot(make_snapshot(), blocking_file / "sub")


def test_tampered_file_raises_corrupt(tmp_path):
    snapshot = make_snapshot()
    write_snapshot(snapshot, tmp_path)
    path = tmp_path / f"{snapshot.snapshot_id}.json"
    raw = bytearray(path.read_bytes())
    index = raw.find(b"15001")
    raw[index] = ord("9")
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptSnapshot):
        read_latest(tmp_path)


def test_missing_snapshot_file_raises_corrupt(tmp_path):
    snapshot = make_snapshot()
    write_snapshot(snapshot, tmp_path)
    (tmp_path / f"{snapshot.snapshot_id}.json").unlink()
    with pytest.raises(CorruptSnapshot):
        read_latest(tmp_path)


def test_snapshot_rejects_wrong_id():
    good = make_snapshot()
    with pytest.raises(HashMismatch):
        Snapshot(
            snapshot_id="0" * 64,
            created_at=good.created_at,
            region_summaries=good.region_summaries,
            health_summaries=good.health_summaries,
            distributions=good.distributions,
            pc_matrices=good.pc_matrices,
            stories=good.stories,
            config_digest=good.config_digest,
        )


def test_snapshot_requires_utc():
    with pytest.raises(ValueError):
        make_snapshot(created_at=datetime(2026, 2, 1, 12, 0))


def test_id_excludes_created_at_and_recomputes():
    snapshot = make_snapshot()
    assert snapshot_id_of(snapshot) == snapshot.snapshot_id
    other = make_snapshot(created_at=datetime(2030, 1, 1, tzinfo=timezone.utc))
    assert snapshot_id_of(other) == snapshot.snapshot_id


def test_stored_bytes_are_canonical(tmp_path):
    story = StoryRecord(
        story_id="st1",
        region_id="15001",
        title="Smoke at dusk",
        body="The haze settles over the valley each evening.",
        image_urls=("http://example.test/a.jpg",),
        sort_order=1,
    )
    snapshot = make_snapshot(stories=[story])
    write_snapshot(snapshot, tmp_path)
    raw = (tmp_path / f"{snapshot.snapshot_id}.json").read_bytes()
    assert raw == canonical_bytes(snapshot_document(snapshot))
    parsed = json.loads(raw.decode("utf-8"))
    assert parsed["stories"][0]["region_id"] == "15001"
    assert parsed["created_at"].endswith("Z")


def test_write_failures_do_not_touch_pointer(tmp_path):
    snapshot = make_snapshot()
    write_snapshot(snapshot, tmp_path)
    # a second store root that cannot be created must not corrupt the first
    with pytest.raises(StorageUnavailable):
        write_snapshot(snapshot, (tmp_path / "latest") / "impossible")
    assert read_latest(tmp_path).snapshot_id == snapshot.snapshot_id
