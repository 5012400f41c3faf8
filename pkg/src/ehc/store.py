"""Content-addressed snapshot store.

A snapshot is everything the service publishes: region summaries for both
datasets, metric distributions, parallel-coordinates matrices, and stories.
Each one is serialized canonically (sorted keys, floats at six decimal
places, no insignificant whitespace), named by the SHA-256 of those bytes,
and written to its own file under the storage root. A ``latest`` pointer
file is swapped atomically so readers always see a complete snapshot.

The created_at stamp and the embedded snapshot_id are excluded from the
hash: identical published contents produce identical ids no matter when
they were built, which is what makes the store deduplicate.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Mapping, Sequence

from .canonical import canonical_bytes, quantize
from .errors import CorruptSnapshot, HashMismatch, NoSnapshot, StorageUnavailable
from .ingest import StoryRecord
from .stats import (
    HealthSummary,
    MetricDistribution,
    PCAxis,
    PCMatrix,
    PCRow,
    RegionSummary,
)

LATEST_POINTER = "latest"
SNAPSHOT_SUFFIX = ".json"


@dataclass(frozen=True)
class Snapshot:
    """One immutable publication of all aggregates.

    snapshot_id is the SHA-256 hex of the canonical body (everything except
    snapshot_id and created_at) and is recomputable from the contents.
    distributions is keyed by (dataset, metric_id); pc_matrices by dataset.
    """

    snapshot_id: str
    created_at: datetime
    region_summaries: tuple[RegionSummary, ...]
    health_summaries: tuple[HealthSummary, ...]
    distributions: Mapping[tuple[str, str], MetricDistribution]
    pc_matrices: Mapping[str, PCMatrix]
    stories: tuple[StoryRecord, ...]
    config_digest: str

    def __post_init__(self) -> None:
        if self.created_at.utcoffset() != timedelta(0):
            raise ValueError("created_at must be UTC")
        recomputed = snapshot_id_of(self)
        if recomputed != self.snapshot_id:
            raise HashMismatch(
                f"snapshot_id {self.snapshot_id} does not match contents {recomputed}"
            )


def build_snapshot(
    region_summaries: Sequence[RegionSummary],
    health_summaries: Sequence[HealthSummary],
    distributions: Mapping[tuple[str, str], MetricDistribution],
    pc_matrices: Mapping[str, PCMatrix],
    stories: Sequence[StoryRecord],
    config_digest: str,
    created_at: datetime | None = None,
) -> Snapshot:
    """Assemble a snapshot, quantizing floats and computing the content id.

    All float fields are rounded to the canonical six decimal places here,
    so a written snapshot reads back structurally equal to the one built.
    """
    body = _body_document(
        region_summaries, health_summaries, distributions, pc_matrices, stories, config_digest
    )
    snapshot_id = hashlib.sha256(canonical_bytes(body)).hexdigest()
    return Snapshot(
        snapshot_id=snapshot_id,
        created_at=created_at or datetime.now(timezone.utc),
        region_summaries=tuple(
            RegionSummary(
                region_id=s.region_id,
                n_deployments=s.n_deployments,
                metrics={k: quantize(v) for k, v in s.metrics.items()},
            )
            for s in region_summaries
        ),
        health_summaries=tuple(
            HealthSummary(
                region_id=s.region_id,
                n_respondents=s.n_respondents,
                prevalence={k: quantize(v) for k, v in s.prevalence.items()},
            )
            for s in health_summaries
        ),
        distributions={
            key: MetricDistribution(
                metric_id=d.metric_id, mu=quantize(d.mu), sigma=quantize(d.sigma)
            )
            for key, d in distributions.items()
        },
        pc_matrices={
            dataset: PCMatrix(
                dataset=m.dataset,
                axes=tuple(
                    PCAxis(metric_id=a.metric_id, min=quantize(a.min), max=quantize(a.max))
                    for a in m.axes
                ),
                rows=tuple(
                    PCRow(
                        region_id=r.region_id,
                        values=tuple(quantize(v) for v in r.values),
                        normalized=tuple(quantize(v) for v in r.normalized),
                    )
                    for r in m.rows
                ),
            )
            for dataset, m in pc_matrices.items()
        },
        stories=tuple(stories),
        config_digest=config_digest,
    )


def snapshot_id_of(snapshot: Snapshot) -> str:
    """Recompute the content hash from a snapshot's published fields."""
    body = _body_document(
        snapshot.region_summaries,
        snapshot.health_summaries,
        snapshot.distributions,
        snapshot.pc_matrices,
        snapshot.stories,
        snapshot.config_digest,
    )
    return hashlib.sha256(canonical_bytes(body)).hexdigest()


def write_snapshot(snapshot: Snapshot, storage_root: str | Path) -> str:
    """Persist a snapshot and point ``latest`` at it.

    Content-addressed: rewriting identical contents keeps the single
    existing file. The pointer swap uses os.replace so concurrent readers
    see either the old snapshot or the new one, never a torn state.
    """
    root = Path(storage_root)
    document = snapshot_document(snapshot)
    payload = canonical_bytes(document)
    body = dict(document)
    body.pop("snapshot_id")
    body.pop("created_at")
    digest = hashlib.sha256(canonical_bytes(body)).hexdigest()
    if digest != snapshot.snapshot_id:
        raise HashMismatch(
            f"serialized contents hash to {digest}, snapshot claims {snapshot.snapshot_id}"
        )
    try:
        root.mkdir(parents=True, exist_ok=True)
        final = root / f"{snapshot.snapshot_id}{SNAPSHOT_SUFFIX}"
        if not final.exists():
            tmp = root / f".{snapshot.snapshot_id}.tmp.{os.getpid()}"
            tmp.write_bytes(payload)
            os.replace(tmp, final)
        pointer_tmp = root / f".{LATEST_POINTER}.tmp.{os.getpid()}"
        pointer_tmp.write_text(snapshot.snapshot_id, encoding="utf-8")
        os.replace(pointer_tmp, root / LATEST_POINTER)
    except OSError as exc:
        raise StorageUnavailable(f"cannot write under {root}: {exc}") from exc
    return snapshot.snapshot_id


def read_latest(storage_root: str | Path) -> Snapshot:
    """Load the snapshot the ``latest`` pointer references, verified."""
    root = Path(storage_root)
    pointer = root / LATEST_POINTER
    try:
        snapshot_id = pointer.read_text(encoding="utf-8").strip()
    except FileNotFoundError:
        raise NoSnapshot(f"no snapshot published under {root}") from None
    except OSError as exc:
        raise StorageUnavailable(f"cannot read {pointer}: {exc}") from exc
    if not snapshot_id:
        raise NoSnapshot(f"empty latest pointer under {root}")
    return read_snapshot(root, snapshot_id)


def read_snapshot(storage_root: str | Path, snapshot_id: str) -> Snapshot:
    """Load one snapshot by id, verifying its content hash."""
    root = Path(storage_root)
    path = root / f"{snapshot_id}{SNAPSHOT_SUFFIX}"
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise CorruptSnapshot(f"snapshot file {path.name} is missing") from None
    except OSError as exc:
        raise StorageUnavailable(f"cannot read {path}: {exc}") from exc
    try:
        document = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptSnapshot(f"snapshot {snapshot_id} is not valid JSON: {exc}") from exc
    body = dict(document)
    body.pop("snapshot_id", None)
    body.pop("created_at", None)
    digest = hashlib.sha256(canonical_bytes(body)).hexdigest()
    if digest != snapshot_id:
        raise CorruptSnapshot(
            f"snapshot {snapshot_id} contents hash to {digest}"
        )
    try:
        return _snapshot_from_document(document)
    except (HashMismatch, KeyError, TypeError, ValueError) as exc:
        raise CorruptSnapshot(f"snapshot {snapshot_id} is malformed: {exc}") from exc


def snapshot_document(snapshot: Snapshot) -> dict[str, Any]:
    """The snapshot as the plain JSON document that gets stored."""
    document = _body_document(
        snapshot.region_summaries,
        snapshot.health_summaries,
        snapshot.distributions,
        snapshot.pc_matrices,
        snapshot.stories,
        snapshot.config_digest,
    )
    document["snapshot_id"] = snapshot.snapshot_id
    document["created_at"] = snapshot.created_at.isoformat().replace("+00:00", "Z")
    return document


def _body_document(
    region_summaries: Sequence[RegionSummary],
    health_summaries: Sequence[HealthSummary],
    distributions: Mapping[tuple[str, str], MetricDistribution],
    pc_matrices: Mapping[str, PCMatrix],
    stories: Sequence[StoryRecord],
    config_digest: str,
) -> dict[str, Any]:
    """The hashed portion of a snapshot as a plain JSON-ready document."""
    return {
        "config_digest": config_digest,
        "region_summaries": [
            {
                "region_id": s.region_id,
                "n_deployments": s.n_deployments,
                "metrics": {k: quantize(v) for k, v in s.metrics.items()},
            }
            for s in sorted(region_summaries, key=lambda s: s.region_id)
        ],
        "health_summaries": [
            {
                "region_id": s.region_id,
                "n_respondents": s.n_respondents,
                "prevalence": {k: quantize(v) for k, v in s.prevalence.items()},
            }
            for s in sorted(health_summaries, key=lambda s: s.region_id)
        ],
        "distributions": {
            f"{dataset}:{metric_id}": {
                "metric_id": d.metric_id,
                "mu": quantize(d.mu),
                "sigma": quantize(d.sigma),
            }
            for (dataset, metric_id), d in sorted(distributions.items())
        },
        "pc_matrices": {
            dataset: {
                "dataset": m.dataset,
                "axes": [
                    {"metric_id": a.metric_id, "min": quantize(a.min), "max": quantize(a.max)}
                    for a in m.axes
                ],
                "rows": [
                    {
                        "region_id": r.region_id,
                        "values": [quantize(v) for v in r.values],
                        "normalized": [quantize(v) for v in r.normalized],
                    }
                    for r in m.rows
                ],
            }
            for dataset, m in sorted(pc_matrices.items())
        },
        "stories": [
            {
                "story_id": s.story_id,
                "region_id": s.region_id,
                "title": s.title,
                "body": s.body,
                "image_urls": list(s.image_urls),
                "sort_order": s.sort_order,
            }
            for s in stories
        ],
    }


def _snapshot_from_document(document: Mapping[str, Any]) -> Snapshot:
    created_raw = str(document["created_at"])
    if created_raw.endswith(("Z", "z")):
        created_raw = created_raw[:-1] + "+00:00"
    distributions: dict[tuple[str, str], MetricDistribution] = {}
    for key, d in document["distributions"].items():
        dataset, _, metric_id = key.partition(":")
        distributions[(dataset, metric_id)] = MetricDistribution(
            metric_id=d["metric_id"], mu=d["mu"], sigma=d["sigma"]
        )
    return Snapshot(
        snapshot_id=document["snapshot_id"],
        created_at=datetime.fromisoformat(created_raw),
        region_summaries=tuple(
            RegionSummary(
                region_id=s["region_id"],
                n_deployments=s["n_deployments"],
                metrics=dict(s["metrics"]),
            )
            for s in document["region_summaries"]
        ),
        health_summaries=tuple(
            HealthSummary(
                region_id=s["region_id"],
                n_respondents=s["n_respondents"],
                prevalence=dict(s["prevalence"]),
            )
            for s in document["health_summaries"]
        ),
        distributions=distributions,
        pc_matrices={
            dataset: PCMatrix(
                dataset=m["dataset"],
                axes=tuple(
                    PCAxis(metric_id=a["metric_id"], min=a["min"], max=a["max"])
                    for a in m["axes"]
                ),
                rows=tuple(
                    PCRow(
                        region_id=r["region_id"],
                        values=tuple(r["values"]),
                        normalized=tuple(r["normalized"]),
                    )
                    for r in m["rows"]
                ),
            )
            for dataset, m in document["pc_matrices"].items()
        },
        stories=tuple(
            StoryRecord(
                story_id=s["story_id"],
                region_id=s["region_id"],
                title=s["title"],
                body=s["body"],
                image_urls=tuple(s["image_urls"]),
                sort_order=s["sort_order"],
            )
            for s in document["stories"]
        ),
        config_digest=document["config_digest"],
    )
