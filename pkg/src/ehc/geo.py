"""Zip-code boundary polygons and point-to-region assignment.

Containment uses the even-odd (ray casting) rule over all of a region's
rings, so points inside hole rings fall outside the region. Points within
EPSILON_DEG of any ring edge count as inside: the boundary belongs to the
region. A linear scan over regions is deliberate; at desk scale an index
would be an optimization, not a contract.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .errors import DegenerateRing, DuplicateRegionId, MissingRegionId, UnknownRegion

Point = tuple[float, float]  # (longitude, latitude), WGS84
Ring = tuple[Point, ...]  # closed: first vertex == last vertex

EPSILON_DEG = 1e-9
DEFAULT_REGION_ID_PROPERTY = "ZCTA5CE10"

_ZIP_RE = re.compile(r"^[0-9]{5}$")


@dataclass(frozen=True)
class RegionBoundary:
    """One region's polygon geometry: outer rings plus hole rings."""

    region_id: str
    outer_rings: tuple[Ring, ...]
    hole_rings: tuple[Ring, ...] = ()

    def __post_init__(self) -> None:
        if not _ZIP_RE.match(self.region_id):
            raise ValueError(f"region_id {self.region_id!r} is not a 5-digit zip")
        if not self.outer_rings:
            raise ValueError("boundary needs at least one outer ring")
        for ring in (*self.outer_rings, *self.hole_rings):
            if len(ring) < 4:
                raise DegenerateRing(f"{self.region_id}: ring has {len(ring)} vertices")
            if ring[0] != ring[-1]:
                raise DegenerateRing(f"{self.region_id}: ring is not closed")


@dataclass(frozen=True)
class RegionRegistry:
    """Immutable map of region_id to boundary."""

    boundaries: Mapping[str, RegionBoundary]

    def region_ids(self) -> list[str]:
        return sorted(self.boundaries)

    def __contains__(self, region_id: str) -> bool:
        return region_id in self.boundaries


def load_boundaries(
    doc: Mapping[str, Any], *, region_id_property: str = DEFAULT_REGION_ID_PROPERTY
) -> RegionRegistry:
    """Build a registry from a GeoJSON FeatureCollection.

    Each feature must carry Polygon or MultiPolygon geometry and the
    region-id property; a MultiPolygon contributes multiple outer rings.
    """
    features = doc.get("features")
    if doc.get("type") != "FeatureCollection" or features is None:
        raise ValueError("document is not a GeoJSON FeatureCollection")
    boundaries: dict[str, RegionBoundary] = {}
    for feature in features:
        properties = feature.get("properties") or {}
        region_id = properties.get(region_id_property)
        if region_id is None or str(region_id) == "":
            raise MissingRegionId(
                f"feature lacks region-id property {region_id_property!r}"
            )
        region_id = str(region_id)
        if region_id in boundaries:
            raise DuplicateRegionId(region_id)
        geometry = feature.get("geometry") or {}
        gtype = geometry.get("type")
        if gtype == "Polygon":
            polygons = [geometry["coordinates"]]
        elif gtype == "MultiPolygon":
            polygons = list(geometry["coordinates"])
        else:
            raise ValueError(f"{region_id}: unsupported geometry type {gtype!r}")
        outer: list[Ring] = []
        holes: list[Ring] = []
        for polygon in polygons:
            if not polygon:
                raise DegenerateRing(f"{region_id}: polygon with no rings")
            outer.append(_as_ring(polygon[0], region_id))
            holes.extend(_as_ring(r, region_id) for r in polygon[1:])
        boundaries[region_id] = RegionBoundary(
            region_id=region_id, outer_rings=tuple(outer), hole_rings=tuple(holes)
        )
    return RegionRegistry(boundaries=boundaries)


def _as_ring(coordinates: Sequence[Sequence[float]], region_id: str) -> Ring:
    ring = tuple((float(v[0]), float(v[1])) for v in coordinates)
    if len(ring) < 4:
        raise DegenerateRing(f"{region_id}: ring has {len(ring)} vertices")
    if ring[0] != ring[-1]:
        raise DegenerateRing(f"{region_id}: ring is not closed")
    return ring


def assign_region(
    latitude: float,
    longitude: float,
    registry: RegionRegistry,
    *,
    eps: float = EPSILON_DEG,
) -> str | None:
    """Return the region containing the point, or None.

    Deterministic and total over valid coordinates: when polygons overlap,
    the lexicographically smallest region_id wins.
    """
    if not -90.0 <= latitude <= 90.0 or not -180.0 <= longitude <= 180.0:
        raise ValueError("coordinates out of range")
    for region_id in sorted(registry.boundaries):
        if region_contains(registry.boundaries[region_id], longitude, latitude, eps=eps):
            return region_id
    return None


def region_contains(
    boundary: RegionBoundary, x: float, y: float, *, eps: float = EPSILON_DEG
) -> bool:
    """Even-odd containment over all rings, boundary-inclusive within eps."""
    rings = (*boundary.outer_rings, *boundary.hole_rings)
    for ring in rings:
        if _on_ring(ring, x, y, eps):
            return True
    crossings = 0
    for ring in rings:
        crossings += _ray_crossings(ring, x, y)
    return crossings % 2 == 1


def _ray_crossings(ring: Ring, x: float, y: float) -> int:
    """Crossings of the rightward horizontal ray from (x, y) with ring edges."""
    count = 0
    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
        if (y1 > y) != (y2 > y):
            x_int = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_int:
                count += 1
    return count


def _on_ring(ring: Ring, x: float, y: float, eps: float) -> bool:
    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
        if _segment_distance_sq(x, y, x1, y1, x2, y2) <= eps * eps:
            return True
    return False


def _segment_distance_sq(
    px: float, py: float, x1: float, y1: float, x2: float, y2: float
) -> float:
    dx, dy = x2 - x1, y2 - y1
    length_sq = dx * dx + dy * dy
    if length_sq == 0.0:
        ex, ey = px - x1, py - y1
        return ex * ex + ey * ey
    t = ((px - x1) * dx + (py - y1) * dy) / length_sq
    t = min(1.0, max(0.0, t))
    ex, ey = px - (x1 + t * dx), py - (y1 + t * dy)
    return ex * ex + ey * ey


# --- annotated output -------------------------------------------------------


def build_feature_collection(
    registry: RegionRegistry,
    summaries: Sequence[Any],
    metric_id: str,
    zscores: Mapping[str, float],
    colors: Mapping[str, str],
) -> dict[str, Any]:
    """Emit one annotated GeoJSON feature per summary, sorted by region_id.

    Works for both air summaries (RegionSummary, metric values under
    ``metrics``, contributor count ``n_deployments``) and health summaries
    (prevalence values, ``n_respondents``). Serializing the result with the
    canonical encoder gives byte-stable output.
    """
    features = []
    for summary in sorted(summaries, key=lambda s: s.region_id):
        region_id = summary.region_id
        boundary = registry.boundaries.get(region_id)
        if boundary is None:
            raise UnknownRegion(region_id)
        properties: dict[str, Any] = {
            "region_id": region_id,
            "metric": metric_id,
            "value": float(_metric_value(summary, metric_id)),
            "z": float(zscores[region_id]),
            "color": colors[region_id],
        }
        if hasattr(summary, "n_deployments"):
            properties["n_deployments"] = summary.n_deployments
        else:
            properties["n_respondents"] = summary.n_respondents
        features.append(
            {
                "type": "Feature",
                "geometry": _boundary_geometry(boundary),
                "properties": properties,
            }
        )
    return {"type": "FeatureCollection", "features": features}


def _metric_value(summary: Any, metric_id: str) -> float:
    if hasattr(summary, "metrics"):
        return summary.metrics[metric_id]
    return summary.prevalence.get(metric_id, 0.0)


def _boundary_geometry(boundary: RegionBoundary) -> dict[str, Any]:
    """Reassemble Polygon/MultiPolygon geometry, re-attaching holes.

    Each hole is attached to the outer ring that contains its first vertex;
    hole-to-outer association is not kept at load time.
    """
    polygons: list[list[list[list[float]]]] = [
        [[[x, y] for x, y in ring]] for ring in boundary.outer_rings
    ]
    for hole in boundary.hole_rings:
        hx, hy = hole[0]
        for outer_index, outer in enumerate(boundary.outer_rings):
            if _ray_crossings(outer, hx, hy) % 2 == 1 or _on_ring(outer, hx, hy, EPSILON_DEG):
                polygons[outer_index].append([[x, y] for x, y in hole])
                break
        else:
            polygons[0].append([[x, y] for x, y in hole])
    if len(polygons) == 1:
        return {"type": "Polygon", "coordinates": polygons[0]}
    return {"type": "MultiPolygon", "coordinates": polygons}
