"""Shared fixtures: a local CSV server, boundary builders, CSV builders."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Iterable, Sequence

import pytest

BASE_TIME = datetime(2026, 1, 1, tzinfo=timezone.utc)

_ACCEPTANCE_LABELS = {
    "test_color_anchor_exactness": "1 color-anchor exactness",
    "test_peak_detection_oracle_equivalence": "2 peak-detection oracle equivalence",
    "test_zscore_properties": "3 z-score properties",
    "test_privacy_guarantee": "4 privacy guarantee",
    "test_point_in_polygon_oracle": "5 point-in-polygon oracle",
    "test_determinism_end_to_end": "6 determinism end-to-end",
    "test_walkthrough_reproduction": "7 walkthrough reproduction",
}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    label = _ACCEPTANCE_LABELS.get(name)
    if label is None:
        return
    outcome = "PASS" if report.passed else "FAIL"
    print(f"\nacceptance {label}: {outcome}", flush=True)


# --- local CSV-over-HTTP server ------------------------------------------------


@dataclass
class CsvServer:
    base_url: str
    documents: dict[str, bytes] = field(default_factory=dict)
    statuses: dict[str, int] = field(default_factory=dict)

    def url(self, path: str) -> str:
        return f"{self.base_url}{path}"

    def set(self, path: str, text: str, status: int = 200) -> str:
        self.documents[path] = text.encode("utf-8")
        self.statuses[path] = status
        return self.url(path)

    def set_bytes(self, path: str, body: bytes, status: int = 200) -> str:
        self.documents[path] = body
        self.statuses[path] = status
        return self.url(path)


@pytest.fixture(scope="session")
def csv_server():
    state = CsvServer(base_url="")

    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):
            body = state.documents.get(self.path)
            if body is None:
                self.send_response(404)
                self.end_headers()
                return
            status = state.statuses.get(self.path, 200)
            self.send_response(status)
            self.send_header("Content-Type", "text/csv; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    state.base_url = f"http://127.0.0.1:{server.server_port}"
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield state
    server.shutdown()
    thread.join(timeout=5)


# --- boundary fixtures ----------------------------------------------------------


def unit_square_ring(x0: float, y0: float, size: float = 1.0) -> list[list[float]]:
    return [
        [x0, y0],
        [x0 + size, y0],
        [x0 + size, y0 + size],
        [x0, y0 + size],
        [x0, y0],
    ]


def square_feature(region_id: str, x0: float, y0: float, size: float = 1.0,
                   id_property: str = "ZCTA5CE10") -> dict:
    return {
        "type": "Feature",
        "properties": {id_property: region_id},
        "geometry": {"type": "Polygon", "coordinates": [unit_square_ring(x0, y0, size)]},
    }


def region_row_geojson(region_ids: Sequence[str], id_property: str = "ZCTA5CE10") -> dict:
    """A row of adjacent unit squares: region i covers x in [i, i+1], y in [0, 1]."""
    return {
        "type": "FeatureCollection",
        "features": [
            square_feature(region_id, float(i), 0.0, id_property=id_property)
            for i, region_id in enumerate(region_ids)
        ],
    }


def donut_geojson(region_id: str = "15099") -> dict:
    """A 4x4 square with a 2x2 hole in the middle."""
    outer = unit_square_ring(0.0, 0.0, 4.0)
    hole = unit_square_ring(1.0, 1.0, 2.0)
    return {
        "type": "FeatureCollection",
        "features": [
            {
                "type": "Feature",
                "properties": {"ZCTA5CE10": region_id},
                "geometry": {"type": "Polygon", "coordinates": [outer, hole]},
            }
        ],
    }


# --- CSV builders ----------------------------------------------------------------


def iso(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def hourly(start: datetime, values: Iterable[float]) -> list[tuple[datetime, float]]:
    return [(start + timedelta(hours=i), float(v)) for i, v in enumerate(values)]


def sensor_csv(rows: Iterable[tuple]) -> str:
    """Rows of (deployment_id, sensor_id, timestamp, value, placement, lat, lon)."""
    out = ["deployment_id,sensor_id,timestamp,value_ug_m3,placement,lat,lon"]
    for deployment_id, sensor_id, ts, value, placement, lat, lon in rows:
        stamp = iso(ts) if isinstance(ts, datetime) else str(ts)
        out.append(f"{deployment_id},{sensor_id},{stamp},{value},{placement},{lat},{lon}")
    return "\n".join(out) + "\n"


def survey_csv(symptom_columns: Sequence[str], rows: Iterable[tuple]) -> str:
    """Rows of (respondent_id, lat, lon, survey_date, *symptom_flags)."""
    out = ["respondent_id,lat,lon,survey_date," + ",".join(symptom_columns)]
    for row in rows:
        out.append(",".join(str(cell) for cell in row))
    return "\n".join(out) + "\n"


def story_csv(rows: Iterable[tuple]) -> str:
    """Rows of (story_id, zip, title, body, image_urls, sort_order)."""
    out = ["story_id,zip,title,body,image_urls,sort_order"]
    for story_id, zip_code, title, body, image_urls, sort_order in rows:
        out.append(f"{story_id},{zip_code},{title},{body},{image_urls},{sort_order}")
    return "\n".join(out) + "\n"


def write_config(tmp_path, *, sources: list[dict], boundaries: dict, **overrides) -> str:
    """Write a boundaries file plus a config file; returns the config path."""
    boundaries_path = tmp_path / "regions.geojson"
    boundaries_path.write_text(json.dumps(boundaries), encoding="utf-8")
    doc = {
        "sources": sources,
        "boundaries": str(boundaries_path),
        "storage_root": str(tmp_path / "snapshots"),
        "peaks": {"delta": 10.0, "min_separation_s": 3600},
        "privacy": {"k_min": 3, "strip_coordinates": True},
        "pm_threshold_ug_m3": 35.0,
    }
    doc.update(overrides)
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(doc), encoding="utf-8")
    return str(config_path)
