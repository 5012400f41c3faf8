/** GeoJSON to SVG path conversion with a flat equirectangular fit. */

import type { RegionFeature, RegionGeometry } from "./types.js";

export interface Bounds {
  minLon: number;
  maxLon: number;
  minLat: number;
  maxLat: number;
}

export interface Projection {
  x(lon: number): number;
  y(lat: number): number;
}

function polygonsOf(geometry: RegionGeometry): number[][][][] {
  return geometry.type === "Polygon" ? [geometry.coordinates] : geometry.coordinates;
}

export function boundsOf(features: RegionFeature[]): Bounds | null {
  let minLon = Infinity;
  let maxLon = -Infinity;
  let minLat = Infinity;
  let maxLat = -Infinity;
  for (const feature of features) {
    for (const polygon of polygonsOf(feature.geometry)) {
      for (const ring of polygon) {
        for (const position of ring) {
          const [lon, lat] = position;
          if (lon === undefined || lat === undefined) continue;
          if (lon < minLon) minLon = lon;
          if (lon > maxLon) maxLon = lon;
          if (lat < minLat) minLat = lat;
          if (lat > maxLat) maxLat = lat;
        }
      }
    }
  }
  if (!Number.isFinite(minLon) || !Number.isFinite(minLat)) return null;
  return { minLon, maxLon, minLat, maxLat };
}

/** Fit bounds into a width x height box, centered, with the y axis flipped. */
export function makeProjection(
  bounds: Bounds,
  width: number,
  height: number,
  pad = 12,
): Projection {
  const spanLon = bounds.maxLon - bounds.minLon || 1;
  const spanLat = bounds.maxLat - bounds.minLat || 1;
  const scale = Math.min((width - 2 * pad) / spanLon, (height - 2 * pad) / spanLat);
  const offsetX = (width - scale * spanLon) / 2;
  const offsetY = (height - scale * spanLat) / 2;
  return {
    x: (lon) => offsetX + (lon - bounds.minLon) * scale,
    y: (lat) => height - offsetY - (lat - bounds.minLat) * scale,
  };
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}

function ringPath(ring: number[][], proj: Projection): string {
  const parts: string[] = [];
  ring.forEach((position, i) => {
    const [lon, lat] = position;
    if (lon === undefined || lat === undefined) return;
    const command = i === 0 ? "M" : "L";
    parts.push(`${command}${round2(proj.x(lon))} ${round2(proj.y(lat))}`);
  });
  parts.push("Z");
  return parts.join(" ");
}

/** Every ring becomes one subpath; holes render via the even-odd fill rule. */
export function geometryPath(geometry: RegionGeometry, proj: Projection): string {
  const paths: string[] = [];
  for (const polygon of polygonsOf(geometry)) {
    for (const ring of polygon) {
      paths.push(ringPath(ring, proj));
    }
  }
  return paths.join(" ");
}

/** Vertex average of the first outer ring; good enough to anchor a marker. */
export function centroidOf(geometry: RegionGeometry): [number, number] {
  const ring = polygonsOf(geometry)[0]?.[0] ?? [];
  const first = ring[0];
  const last = ring[ring.length - 1];
  const closed =
    ring.length > 1 &&
    first !== undefined &&
    last !== undefined &&
    first[0] === last[0] &&
    first[1] === last[1];
  const vertices = closed ? ring.slice(0, -1) : ring;
  let sumLon = 0;
  let sumLat = 0;
  let count = 0;
  for (const position of vertices) {
    const [lon, lat] = position;
    if (lon === undefined || lat === undefined) continue;
    sumLon += lon;
    sumLat += lat;
    count += 1;
  }
  if (count === 0) return [0, 0];
  return [sumLon / count, sumLat / count];
}
