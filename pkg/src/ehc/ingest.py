"""Fetch remote tabular sources, parse and validate the three record kinds.

Sources are CSV documents over HTTP(S) (a published spreadsheet qualifies).
Parsing is strict about schemas and permissive about individual rows: a row
that fails validation is dropped and reported in a reject list, never allowed
to take the rest of the table down with it.
"""

from __future__ import annotations

import csv
import io
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Mapping, Sequence

import requests

from .errors import (
    AllSourcesFailed,
    CsvMalformed,
    DuplicateSortOrder,
    SchemaMismatch,
    SourceUnavailable,
)

logger = logging.getLogger(__name__)

SOURCE_KINDS = ("sensor", "survey", "story")
PLACEMENTS = ("indoor", "outdoor")

SENSOR_HEADER = ("deployment_id", "sensor_id", "timestamp", "value_ug_m3", "placement", "lat", "lon")
SURVEY_FIXED_HEADER = ("respondent_id", "lat", "lon", "survey_date")
STORY_HEADER = ("story_id", "zip", "title", "body", "image_urls", "sort_order")

PHYSICAL_PREFIX = "phys_"
PSYCHOSOCIAL_PREFIX = "psych_"

DEFAULT_REFRESH_INTERVAL_S = 900
DEFAULT_NOMINAL_INTERVAL_S = 60

FETCH_TIMEOUT_S = 30.0

# run_sync is globally exclusive; individual fetches within it run concurrently.
_SYNC_LOCK = threading.Lock()


@dataclass(frozen=True)
class SourceConfig:
    """One remote tabular source and how often to refresh it."""

    source_id: str
    kind: str
    url: str
    refresh_interval_s: int = DEFAULT_REFRESH_INTERVAL_S

    def __post_init__(self) -> None:
        if not self.source_id:
            raise ValueError("source_id must be non-empty")
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"kind must be one of {SOURCE_KINDS}, got {self.kind!r}")
        if not self.url:
            raise ValueError("url must be non-empty")
        if self.refresh_interval_s < 60:
            raise ValueError("refresh_interval_s must be >= 60")


@dataclass(frozen=True)
class RawTable:
    """A fetched CSV document: header plus string-cell rows."""

    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    source_id: str
    fetched_at: datetime

    def __post_init__(self) -> None:
        if len(set(self.header)) != len(self.header):
            raise ValueError("header names must be unique")
        width = len(self.header)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} cells, header has {width}")


@dataclass(frozen=True)
class SensorDeployment:
    """One sensor placement: location, indoor/outdoor flag, particulate readings."""

    deployment_id: str
    sensor_id: str
    placement: str
    latitude: float
    longitude: float
    readings: tuple[tuple[datetime, float], ...]
    nominal_interval_s: int = DEFAULT_NOMINAL_INTERVAL_S

    def __post_init__(self) -> None:
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {PLACEMENTS}")
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError("latitude out of range")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError("longitude out of range")
        if self.nominal_interval_s <= 0:
            raise ValueError("nominal_interval_s must be positive")
        prev: datetime | None = None
        for ts, value in self.readings:
            if value < 0:
                raise ValueError("readings must be non-negative")
            if prev is not None and ts <= prev:
                raise ValueError("readings must be strictly increasing in timestamp")
            prev = ts


@dataclass(frozen=True)
class SurveyRecord:
    """One self-reported health survey response."""

    respondent_id: str
    latitude: float
    longitude: float
    survey_date: date
    symptoms: Mapping[str, bool]
    categories: Mapping[str, str]  # symptom name -> "physical" | "psychosocial"

    def __post_init__(self) -> None:
        if not self.symptoms:
            raise ValueError("at least one symptom key must be present")
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError("latitude out of range")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError("longitude out of range")


@dataclass(frozen=True)
class StoryRecord:
    """Narrative text plus ordered images anchored to a region."""

    story_id: str
    region_id: str
    title: str
    body: str
    image_urls: tuple[str, ...]
    sort_order: int

    def __post_init__(self) -> None:
        if not self.body:
            raise ValueError("story body must be non-empty")


@dataclass(frozen=True)
class RejectedRow:
    """One dropped input row: where it was and why it was dropped.

    ``line`` is the row's 1-based physical line in the source CSV, counting
    the header as line 1 (so the first data row is line 2).
    """

    line: int
    reason: str


@dataclass(frozen=True)
class SourceError:
    """A source that failed during a sync, and at which stage."""

    source_id: str
    stage: str  # "fetch" | "parse"
    message: str


@dataclass(frozen=True)
class IngestBatch:
    """Everything one sync produced: records, rejects, timestamps, failures."""

    deployments: tuple[SensorDeployment, ...]
    surveys: tuple[SurveyRecord, ...]
    stories: tuple[StoryRecord, ...]
    rejects: Mapping[str, tuple[RejectedRow, ...]]
    fetched_at: Mapping[str, datetime]
    errors: tuple[SourceError, ...] = ()


# --- fetching ---------------------------------------------------------------


def fetch_source(cfg: SourceConfig, *, timeout_s: float = FETCH_TIMEOUT_S) -> RawTable:
    """Fetch one source and parse its CSV structure into a RawTable.

    Raises SourceUnavailable on network failure or a non-2xx status, and
    CsvMalformed (with the offending physical line) on structural CSV damage:
    unbalanced quotes, ragged rows, an empty document, or non-UTF-8 bytes.
    """
    try:
        response = requests.get(cfg.url, timeout=timeout_s)
    except requests.RequestException as exc:
        raise SourceUnavailable(f"{cfg.source_id}: {exc}") from exc
    if not 200 <= response.status_code < 300:
        raise SourceUnavailable(f"{cfg.source_id}: HTTP {response.status_code} from {cfg.url}")
    try:
        text = response.content.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CsvMalformed("document is not valid UTF-8", line=1) from exc
    table = parse_csv_text(text, source_id=cfg.source_id, fetched_at=_utc_now())
    return table


def parse_csv_text(text: str, *, source_id: str, fetched_at: datetime) -> RawTable:
    """Parse CSV text into a RawTable, enforcing rectangular shape."""
    reader = csv.reader(io.StringIO(text))
    try:
        raw_rows = [(row, reader.line_num) for row in reader]
    except csv.Error as exc:
        raise CsvMalformed(str(exc), line=reader.line_num) from exc
    # A trailing newline yields one empty row; drop fully-empty rows.
    raw_rows = [(row, line) for row, line in raw_rows if row]
    if not raw_rows:
        raise CsvMalformed("document has no header row", line=1)
    header_cells, _ = raw_rows[0]
    header = tuple(cell.strip() for cell in header_cells)
    if len(set(header)) != len(header):
        raise CsvMalformed("duplicate header names", line=1)
    rows = []
    for row, line in raw_rows[1:]:
        if len(row) != len(header):
            raise CsvMalformed(
                f"row has {len(row)} cells, header has {len(header)}", line=line
            )
        rows.append(tuple(row))
    return RawTable(header=header, rows=tuple(rows), source_id=source_id, fetched_at=fetched_at)


# --- row-level parsing helpers ----------------------------------------------


def _parse_utc_timestamp(cell: str) -> datetime:
    """Parse an ISO-8601 timestamp with an explicit UTC designator.

    Naive timestamps and non-UTC offsets are rejected: local-time guessing is
    how cross-sensor comparisons go wrong.
    """
    text = cell.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None or parsed.utcoffset() != timedelta(0):
        raise ValueError(f"timestamp {cell!r} is not explicit UTC")
    return parsed.astimezone(timezone.utc)


def _parse_coordinate(lat_cell: str, lon_cell: str) -> tuple[float, float]:
    lat = float(lat_cell)
    lon = float(lon_cell)
    if not -90.0 <= lat <= 90.0 or not -180.0 <= lon <= 180.0:
        raise ValueError("coordinate out of range")
    return lat, lon


def _data_line(row_index: int) -> int:
    # Header occupies physical line 1.
    return row_index + 2


# --- sensor tables ----------------------------------------------------------


def parse_sensor_table(
    table: RawTable, *, nominal_interval_s: int = DEFAULT_NOMINAL_INTERVAL_S
) -> tuple[list[SensorDeployment], list[RejectedRow]]:
    """Group sensor rows into deployments with time-ordered readings.

    Rows failing validation are dropped and reported; the deployment is still
    built from its remaining rows. Output is deterministic and independent of
    row order: readings are re-sorted by timestamp, duplicate timestamps keep
    the lexicographically smallest row, and deployment metadata is taken from
    the earliest reading's row.
    """
    if table.header != SENSOR_HEADER:
        raise SchemaMismatch(
            f"sensor table header mismatch: got {list(table.header)}"
        )
    rejects: list[RejectedRow] = []
    # deployment_id -> list of (timestamp, value, sensor_id, placement, lat, lon, line)
    groups: dict[str, list[tuple]] = {}
    for i, row in enumerate(table.rows):
        line = _data_line(i)
        dep_id, sensor_id, ts_cell, value_cell, placement, lat_cell, lon_cell = row
        dep_id = dep_id.strip()
        if not dep_id:
            rejects.append(RejectedRow(line, "bad_deployment_id"))
            continue
        try:
            ts = _parse_utc_timestamp(ts_cell)
        except ValueError:
            rejects.append(RejectedRow(line, "bad_timestamp"))
            continue
        try:
            value = float(value_cell)
        except ValueError:
            rejects.append(RejectedRow(line, "bad_value"))
            continue
        if value < 0:
            rejects.append(RejectedRow(line, "negative_value"))
            continue
        placement = placement.strip()
        if placement not in PLACEMENTS:
            rejects.append(RejectedRow(line, "bad_placement"))
            continue
        try:
            lat, lon = _parse_coordinate(lat_cell, lon_cell)
        except ValueError:
            rejects.append(RejectedRow(line, "bad_coordinate"))
            continue
        groups.setdefault(dep_id, []).append(
            (ts, value, sensor_id.strip(), placement, lat, lon, line)
        )

    deployments = []
    for dep_id in sorted(groups):
        candidates = sorted(groups[dep_id], key=lambda c: c[:6])
        readings: list[tuple[datetime, float]] = []
        kept_rows: list[tuple] = []
        for cand in candidates:
            if readings and cand[0] == readings[-1][0]:
                rejects.append(RejectedRow(cand[6], "duplicate_timestamp"))
                continue
            readings.append((cand[0], cand[1]))
            kept_rows.append(cand)
        if not kept_rows:
            continue
        first = kept_rows[0]  # earliest timestamp: metadata source
        deployments.append(
            SensorDeployment(
                deployment_id=dep_id,
                sensor_id=first[2],
                placement=first[3],
                latitude=first[4],
                longitude=first[5],
                readings=tuple(readings),
                nominal_interval_s=nominal_interval_s,
            )
        )
    rejects.sort(key=lambda r: r.line)
    return deployments, rejects


# --- survey tables ----------------------------------------------------------


def survey_symptom_columns(header: Sequence[str]) -> list[tuple[str, str]]:
    """Resolve symptom columns to (bare name, category) pairs.

    Column names declare their category through the ``phys_`` / ``psych_``
    prefix; anything else in the symptom block is a schema violation.
    """
    if tuple(header[: len(SURVEY_FIXED_HEADER)]) != SURVEY_FIXED_HEADER:
        raise SchemaMismatch(
            f"survey table must start with {list(SURVEY_FIXED_HEADER)}, got {list(header[:4])}"
        )
    symptom_cols = header[len(SURVEY_FIXED_HEADER):]
    if not symptom_cols:
        raise SchemaMismatch("survey table has no symptom columns")
    resolved: list[tuple[str, str]] = []
    for col in symptom_cols:
        if col.startswith(PHYSICAL_PREFIX):
            name, category = col[len(PHYSICAL_PREFIX):], "physical"
        elif col.startswith(PSYCHOSOCIAL_PREFIX):
            name, category = col[len(PSYCHOSOCIAL_PREFIX):], "psychosocial"
        else:
            raise SchemaMismatch(f"symptom column {col!r} lacks a category prefix")
        if not name:
            raise SchemaMismatch(f"symptom column {col!r} has an empty name")
        resolved.append((name, category))
    names = [name for name, _ in resolved]
    if len(set(names)) != len(names):
        raise SchemaMismatch("symptom names collide after prefix stripping")
    return resolved


def parse_survey_table(table: RawTable) -> tuple[list[SurveyRecord], list[RejectedRow]]:
    """Parse one SurveyRecord per row; blank symptom cells mean not-reported."""
    symptom_cols = survey_symptom_columns(table.header)
    categories = dict(symptom_cols)
    rejects: list[RejectedRow] = []
    records: list[SurveyRecord] = []
    for i, row in enumerate(table.rows):
        line = _data_line(i)
        respondent_id = row[0].strip()
        if not respondent_id:
            rejects.append(RejectedRow(line, "bad_respondent_id"))
            continue
        try:
            lat, lon = _parse_coordinate(row[1], row[2])
        except ValueError:
            rejects.append(RejectedRow(line, "bad_coordinate"))
            continue
        try:
            survey_date = date.fromisoformat(row[3].strip())
        except ValueError:
            rejects.append(RejectedRow(line, "bad_date"))
            continue
        symptoms: dict[str, bool] = {}
        cell_error = False
        for (name, _), cell in zip(symptom_cols, row[4:]):
            cell = cell.strip()
            if cell == "1":
                symptoms[name] = True
            elif cell in ("0", ""):
                symptoms[name] = False
            else:
                cell_error = True
                break
        if cell_error:
            rejects.append(RejectedRow(line, "bad_symptom_value"))
            continue
        records.append(
            SurveyRecord(
                respondent_id=respondent_id,
                latitude=lat,
                longitude=lon,
                survey_date=survey_date,
                symptoms=symptoms,
                categories=categories,
            )
        )
    return records, rejects


# --- story tables -----------------------------------------------------------


def parse_story_table(table: RawTable) -> tuple[list[StoryRecord], list[RejectedRow]]:
    """Parse stories, sorted by sort_order; image_urls split on ';'."""
    if table.header != STORY_HEADER:
        raise SchemaMismatch(f"story table header mismatch: got {list(table.header)}")
    rejects: list[RejectedRow] = []
    records: list[StoryRecord] = []
    seen_orders: dict[int, int] = {}
    for i, row in enumerate(table.rows):
        line = _data_line(i)
        story_id, zip_code, title, body, image_cell, order_cell = row
        story_id = story_id.strip()
        zip_code = zip_code.strip()
        if not story_id:
            rejects.append(RejectedRow(line, "bad_story_id"))
            continue
        if len(zip_code) != 5 or not zip_code.isdigit():
            rejects.append(RejectedRow(line, "bad_zip"))
            continue
        if not body:
            rejects.append(RejectedRow(line, "empty_body"))
            continue
        try:
            sort_order = int(order_cell.strip())
        except ValueError:
            rejects.append(RejectedRow(line, "bad_sort_order"))
            continue
        if sort_order in seen_orders:
            raise DuplicateSortOrder(
                f"sort_order {sort_order} on lines {seen_orders[sort_order]} and {line}"
            )
        seen_orders[sort_order] = line
        image_urls = tuple(u for u in (part.strip() for part in image_cell.split(";")) if u)
        records.append(
            StoryRecord(
                story_id=story_id,
                region_id=zip_code,
                title=title.strip(),
                body=body,
                image_urls=image_urls,
                sort_order=sort_order,
            )
        )
    records.sort(key=lambda s: s.sort_order)
    return records, rejects


# --- sync -------------------------------------------------------------------


def run_sync(cfgs: Sequence[SourceConfig], *, timeout_s: float = FETCH_TIMEOUT_S) -> IngestBatch:
    """Fetch and parse every configured source; partial success is success.

    A failed source contributes an error entry rather than aborting the batch.
    Raises AllSourcesFailed only when every fetch errored. At most one sync
    runs at a time; fetches within it run concurrently.
    """
    if not cfgs:
        raise ValueError("at least one source must be configured")
    ids = [c.source_id for c in cfgs]
    if len(set(ids)) != len(ids):
        raise ValueError("source_id must be unique within a configuration")

    with _SYNC_LOCK:
        with ThreadPoolExecutor(max_workers=min(8, len(cfgs))) as pool:
            fetched = list(pool.map(lambda c: _try_fetch(c, timeout_s), cfgs))

    deployments: list[SensorDeployment] = []
    surveys: list[SurveyRecord] = []
    stories: list[StoryRecord] = []
    rejects: dict[str, tuple[RejectedRow, ...]] = {}
    fetched_at: dict[str, datetime] = {}
    errors: list[SourceError] = []
    fetch_failures = 0
    story_orders: dict[int, str] = {}

    for cfg, outcome in zip(cfgs, fetched):
        if isinstance(outcome, SourceError):
            errors.append(outcome)
            fetch_failures += 1
            continue
        fetched_at[cfg.source_id] = outcome.fetched_at
        try:
            if cfg.kind == "sensor":
                records, rej = parse_sensor_table(outcome)
                deployments.extend(records)
            elif cfg.kind == "survey":
                records, rej = parse_survey_table(outcome)
                surveys.extend(records)
            else:
                records, rej = parse_story_table(outcome)
                _check_cross_source_orders(records, story_orders, cfg.source_id)
                stories.extend(records)
        except (SchemaMismatch, DuplicateSortOrder) as exc:
            errors.append(SourceError(cfg.source_id, "parse", str(exc)))
            continue
        rejects[cfg.source_id] = tuple(rej)

    if fetch_failures == len(cfgs):
        raise AllSourcesFailed(
            "; ".join(f"{e.source_id}: {e.message}" for e in errors)
        )
    stories.sort(key=lambda s: s.sort_order)
    return IngestBatch(
        deployments=tuple(deployments),
        surveys=tuple(surveys),
        stories=tuple(stories),
        rejects=rejects,
        fetched_at=fetched_at,
        errors=tuple(errors),
    )


def _check_cross_source_orders(
    records: list[StoryRecord], seen: dict[int, str], source_id: str
) -> None:
    # The later source (in configuration order) is charged with the collision.
    for record in records:
        if record.sort_order in seen:
            raise DuplicateSortOrder(
                f"sort_order {record.sort_order} already used by source {seen[record.sort_order]}"
            )
    for record in records:
        seen[record.sort_order] = source_id


def _try_fetch(cfg: SourceConfig, timeout_s: float) -> RawTable | SourceError:
    try:
        return fetch_source(cfg, timeout_s=timeout_s)
    except (SourceUnavailable, CsvMalformed) as exc:
        logger.warning("source %s failed to fetch: %s", cfg.source_id, exc)
        return SourceError(cfg.source_id, "fetch", str(exc))


def _utc_now() -> datetime:
    return datetime.now(tz=timezone.utc)
