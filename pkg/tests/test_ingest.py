"""CSV parsing, reject reporting, and multi-source sync behavior."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from ehc.errors import (
    AllSourcesFailed,
    CsvMalformed,
    DuplicateSortOrder,
    SchemaMismatch,
    SourceUnavailable,
)
from ehc.ingest import (
    RawTable,
    SourceConfig,
    fetch_source,
    parse_csv_text,
    parse_sensor_table,
    parse_story_table,
    parse_survey_table,
    run_sync,
    survey_symptom_columns,
)

from conftest import BASE_TIME, iso, sensor_csv, story_csv, survey_csv

NOW = datetime(2026, 2, 1, tzinfo=timezone.utc)


def table_from(text: str) -> RawTable:
    return parse_csv_text(text, source_id="t", fetched_at=NOW)


# --- CSV structure ---------------------------------------------------------


def test_parse_csv_basic_shape():
    table = table_from("a,b\n1,2\n3,4\n")
    assert table.header == ("a", "b")
    assert table.rows == (("1", "2"), ("3", "4"))


def test_ragged_row_reports_physical_line():
    with pytest.raises(CsvMalformed) as err:
        table_from("a,b\n1,2\n1,2,3\n")
    assert err.value.line == 3


def test_empty_document_is_malformed():
    with pytest.raises(CsvMalformed) as err:
        table_from("")
    assert err.value.line == 1


def test_duplicate_header_names_rejected():
    with pytest.raises(CsvMalformed):
        table_from("a,a\n1,2\n")


def test_quoted_cells_with_commas_survive():
    table = table_from('a,b\n"x,y",2\n')
    assert table.rows == (("x,y", "2"),)


# --- sensor tables ----------------------------------------------------------


def make_sensor_table(rows) -> RawTable:
    return table_from(sensor_csv(rows))


def test_sensor_happy_path_groups_and_orders():
    rows = [
        ("d1", "s1", BASE_TIME + timedelta(hours=1), 12.0, "indoor", 0.5, 0.5),
        ("d1", "s1", BASE_TIME, 10.0, "indoor", 0.5, 0.5),
        ("d2", "s2", BASE_TIME, 7.5, "outdoor", 0.5, 1.5),
    ]
    deployments, rejects = parse_sensor_table(make_sensor_table(rows))
    assert rejects == []
    assert [d.deployment_id for d in deployments] == ["d1", "d2"]
    d1 = deployments[0]
    assert [v for _, v in d1.readings] == [10.0, 12.0]
    assert d1.placement == "indoor"
    assert (d1.latitude, d1.longitude) == (0.5, 0.5)


def test_sensor_header_mismatch_is_schema_error():
    with pytest.raises(SchemaMismatch):
        parse_sensor_table(table_from("deployment_id,value\nd1,5\n"))


@pytest.mark.parametrize(
    "row,reason",
    [
        (("", "s1", "2026-01-01T00:00:00Z", "1", "indoor", "0.5", "0.5"), "bad_deployment_id"),
        (("d1", "s1", "not-a-time", "1", "indoor", "0.5", "0.5"), "bad_timestamp"),
        (("d1", "s1", "2026-01-01T00:00:00", "1", "indoor", "0.5", "0.5"), "bad_timestamp"),
        (("d1", "s1", "2026-01-01T00:00:00+02:00", "1", "indoor", "0.5", "0.5"), "bad_timestamp"),
        (("d1", "s1", "2026-01-01T00:00:00Z", "soot", "indoor", "0.5", "0.5"), "bad_value"),
        (("d1", "s1", "2026-01-01T00:00:00Z", "-3", "indoor", "0.5", "0.5"), "negative_value"),
        (("d1", "s1", "2026-01-01T00:00:00Z", "1", "porch", "0.5", "0.5"), "bad_placement"),
        (("d1", "s1", "2026-01-01T00:00:00Z", "1", "indoor", "95", "0.5"), "bad_coordinate"),
        (("d1", "s1", "2026-01-01T00:00:00Z", "1", "indoor", "x", "0.5"), "bad_coordinate"),
    ],
)
def test_sensor_row_rejects(row, reason):
    text = sensor_csv([row])
    deployments, rejects = parse_sensor_table(table_from(text))
    assert deployments == []
    assert len(rejects) == 1
    assert rejects[0].line == 2
    assert rejects[0].reason == reason


def test_sensor_reject_lines_count_header_as_line_one():
    rows = [
        ("d1", "s1", BASE_TIME, 10.0, "indoor", 0.5, 0.5),
        ("d1", "s1", "bad", 10.0, "indoor", 0.5, 0.5),
        ("d1", "s1", BASE_TIME + timedelta(hours=1), 11.0, "indoor", 0.5, 0.5),
    ]
    _, rejects = parse_sensor_table(make_sensor_table(rows))
    assert [(r.line, r.reason) for r in rejects] == [(3, "bad_timestamp")]


def test_sensor_duplicate_timestamp_keeps_smallest_row():
    ts = BASE_TIME
    rows = [
        ("d1", "s9", ts, 20.0, "outdoor", 0.6, 0.6),
        ("d1", "s1", ts, 10.0, "indoor", 0.5, 0.5),
        ("d1", "s1", ts + timedelta(hours=1), 11.0, "indoor", 0.5, 0.5),
    ]
    deployments, rejects = parse_sensor_table(make_sensor_table(rows))
    assert len(deployments) == 1
    d = deployments[0]
    assert [v for _, v in d.readings] == [10.0, 11.0]
    assert d.sensor_id == "s1"
    assert [r.reason for r in rejects] == ["duplicate_timestamp"]
    assert rejects[0].line == 2


def test_sensor_row_order_does_not_matter():
    rows = [
        ("d1", "s1", BASE_TIME + timedelta(hours=i), 10.0 + i, "indoor", 0.5, 0.5)
        for i in range(5)
    ]
    forward, _ = parse_sensor_table(make_sensor_table(rows))
    backward, _ = parse_sensor_table(make_sensor_table(list(reversed(rows))))
    assert forward == backward


# --- survey tables ----------------------------------------------------------


def test_symptom_column_resolution():
    cols = survey_symptom_columns(
        ("respondent_id", "lat", "lon", "survey_date", "phys_cough", "psych_anxiety")
    )
    assert cols == [("cough", "physical"), ("anxiety", "psychosocial")]


@pytest.mark.parametrize(
    "header",
    [
        ("respondent_id", "lat", "lon", "survey_date"),
        ("respondent_id", "lat", "lon", "survey_date", "cough"),
        ("respondent_id", "lat", "lon", "survey_date", "phys_"),
        ("respondent_id", "lat", "lon", "survey_date", "phys_x", "psych_x"),
        ("lat", "respondent_id", "lon", "survey_date", "phys_x"),
    ],
)
def test_bad_survey_headers(header):
    with pytest.raises(SchemaMismatch):
        survey_symptom_columns(header)


def test_survey_rows_parse_flags_and_blanks():
    text = survey_csv(
        ["phys_cough", "psych_anxiety"],
        [
            ("r1", 0.5, 0.5, "2026-01-15", 1, 0),
            ("r2", 0.5, 0.5, "2026-01-15", "", 1),
        ],
    )
    records, rejects = parse_survey_table(table_from(text))
    assert rejects == []
    assert records[0].symptoms == {"cough": True, "anxiety": False}
    assert records[1].symptoms == {"cough": False, "anxiety": True}
    assert records[0].categories == {"cough": "physical", "anxiety": "psychosocial"}


@pytest.mark.parametrize(
    "row,reason",
    [
        (("", 0.5, 0.5, "2026-01-15", 1), "bad_respondent_id"),
        (("r1", 99, 0.5, "2026-01-15", 1), "bad_coordinate"),
        (("r1", 0.5, 0.5, "01/15/2026", 1), "bad_date"),
        (("r1", 0.5, 0.5, "2026-01-15", "maybe"), "bad_symptom_value"),
    ],
)
def test_survey_row_rejects(row, reason):
    text = survey_csv(["phys_cough"], [row])
    records, rejects = parse_survey_table(table_from(text))
    assert records == []
    assert [(r.line, r.reason) for r in rejects] == [(2, reason)]


# --- story tables -----------------------------------------------------------


def test_story_parse_sorts_by_sort_order_and_splits_images():
    text = story_csv(
        [
            ("st2", "15002", "Second", "Body two", "http://a/1.jpg;http://a/2.jpg", 2),
            ("st1", "15001", "First", "Body one", "", 1),
        ]
    )
    records, rejects = parse_story_table(table_from(text))
    assert rejects == []
    assert [s.story_id for s in records] == ["st1", "st2"]
    assert records[1].image_urls == ("http://a/1.jpg", "http://a/2.jpg")
    assert records[0].image_urls == ()
    assert records[0].region_id == "15001"


@pytest.mark.parametrize(
    "row,reason",
    [
        (("", "15001", "T", "B", "", 1), "bad_story_id"),
        (("s1", "1500", "T", "B", "", 1), "bad_zip"),
        (("s1", "15o01", "T", "B", "", 1), "bad_zip"),
        (("s1", "15001", "T", "", "", 1), "empty_body"),
        (("s1", "15001", "T", "B", "", "first"), "bad_sort_order"),
    ],
)
def test_story_row_rejects(row, reason):
    records, rejects = parse_story_table(table_from(story_csv([row])))
    assert records == []
    assert [(r.line, r.reason) for r in rejects] == [(2, reason)]


def test_story_duplicate_sort_order_fails_table():
    text = story_csv(
        [
            ("s1", "15001", "A", "Body", "", 1),
            ("s2", "15002", "B", "Body", "", 1),
        ]
    )
    with pytest.raises(DuplicateSortOrder):
        parse_story_table(table_from(text))


# --- fetching and sync -------------------------------------------------------


def test_fetch_source_http_error(csv_server):
    url = csv_server.set("/broken.csv", "a,b\n1,2\n", status=500)
    with pytest.raises(SourceUnavailable):
        fetch_source(SourceConfig(source_id="s", kind="sensor", url=url))


def test_fetch_source_bad_utf8(csv_server):
    url = csv_server.set_bytes("/bin.csv", b"a,b\n\xff\xfe,2\n")
    with pytest.raises(CsvMalformed):
        fetch_source(SourceConfig(source_id="s", kind="sensor", url=url))


def test_fetch_source_connection_refused():
    cfg = SourceConfig(source_id="s", kind="sensor", url="http://127.0.0.1:9/none.csv")
    with pytest.raises(SourceUnavailable):
        fetch_source(cfg, timeout_s=2.0)


def sync_fixture_urls(csv_server, prefix: str) -> list[SourceConfig]:
    sensor_url = csv_server.set(
        f"/{prefix}/sensors.csv",
        sensor_csv(
            [
                ("d1", "s1", BASE_TIME + timedelta(hours=i), 5.0 + i, "indoor", 0.5, 0.5)
                for i in range(3)
            ]
        ),
    )
    survey_url = csv_server.set(
        f"/{prefix}/surveys.csv",
        survey_csv(["phys_cough"], [("r1", 0.5, 0.5, "2026-01-15", 1)]),
    )
    story_url = csv_server.set(
        f"/{prefix}/stories.csv",
        story_csv([("st1", "15001", "T", "Body", "", 1)]),
    )
    return [
        SourceConfig(source_id="sensors", kind="sensor", url=sensor_url),
        SourceConfig(source_id="surveys", kind="survey", url=survey_url),
        SourceConfig(source_id="stories", kind="story", url=story_url),
    ]


def test_run_sync_happy_path(csv_server):
    batch = run_sync(sync_fixture_urls(csv_server, "happy"))
    assert len(batch.deployments) == 1
    assert len(batch.surveys) == 1
    assert len(batch.stories) == 1
    assert batch.errors == ()
    assert set(batch.fetched_at) == {"sensors", "surveys", "stories"}


def test_run_sync_partial_failure(csv_server):
    cfgs = sync_fixture_urls(csv_server, "partial")
    cfgs[1] = SourceConfig(
        source_id="surveys",
        kind="survey",
        url=csv_server.set("/partial/surveys.csv", "a,b\n1,2\n", status=503),
    )
    batch = run_sync(cfgs)
    assert len(batch.deployments) == 1
    assert batch.surveys == ()
    assert [e.source_id for e in batch.errors] == ["surveys"]
    assert batch.errors[0].stage == "fetch"


def test_run_sync_parse_failure_is_not_fetch_failure(csv_server):
    cfgs = sync_fixture_urls(csv_server, "parsefail")
    cfgs[0] = SourceConfig(
        source_id="sensors",
        kind="sensor",
        url=csv_server.set("/parsefail/sensors.csv", "wrong,header\n1,2\n"),
    )
    batch = run_sync(cfgs)
    assert batch.deployments == ()
    assert [e.stage for e in batch.errors] == ["parse"]
    assert len(batch.surveys) == 1


def test_run_sync_all_sources_failed(csv_server):
    cfgs = [
        SourceConfig(
            source_id="a",
            kind="sensor",
            url=csv_server.set("/down/a.csv", "x", status=500),
        ),
        SourceConfig(
            source_id="b",
            kind="story",
            url=csv_server.set("/down/b.csv", "x", status=404),
        ),
    ]
    with pytest.raises(AllSourcesFailed):
        run_sync(cfgs)


def test_run_sync_cross_source_sort_order_collision(csv_server):
    first = csv_server.set(
        "/cross/a.csv", story_csv([("s1", "15001", "A", "Body", "", 1)])
    )
    second = csv_server.set(
        "/cross/b.csv", story_csv([("s2", "15002", "B", "Body", "", 1)])
    )
    batch = run_sync(
        [
            SourceConfig(source_id="stories_a", kind="story", url=first),
            SourceConfig(source_id="stories_b", kind="story", url=second),
        ]
    )
    assert [s.story_id for s in batch.stories] == ["s1"]
    assert [e.source_id for e in batch.errors] == ["stories_b"]


def test_run_sync_requires_unique_ids(csv_server):
    url = csv_server.set("/dup/a.csv", story_csv([("s1", "15001", "A", "B", "", 1)]))
    cfg = SourceConfig(source_id="same", kind="story", url=url)
    with pytest.raises(ValueError):
        run_sync([cfg, cfg])


def test_timestamp_parse_formats():
    rows = [
        ("d1", "s1", "2026-01-01T00:00:00Z", "1", "indoor", "0.5", "0.5"),
        ("d1", "s1", "2026-01-01T01:00:00+00:00", "2", "indoor", "0.5", "0.5"),
    ]
    deployments, rejects = parse_sensor_table(table_from(sensor_csv(rows)))
    assert rejects == []
    assert len(deployments[0].readings) == 2


def test_iso_helper_round_trips():
    assert iso(BASE_TIME) == "2026-01-01T00:00:00Z"
