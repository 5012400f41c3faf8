/** Choropleth rendering: region polygons, story markers, and the legend.
 *
 * Polygon fills come verbatim from the regions payload; the client never
 * derives a color of its own.
 */

import { boundsOf, centroidOf, geometryPath, makeProjection } from "./geometry.js";
import type { RegionsPayload, Story } from "./types.js";

export const MAP_WIDTH = 800;
export const MAP_HEIGHT = 420;

const SVG_NS = "http://www.w3.org/2000/svg";

export interface HeatmapHandlers {
  onRegionClick(regionId: string): void;
  onMarkerClick(regionId: string): void;
  onBackgroundClick(): void;
}

function svgElement<K extends keyof SVGElementTagNameMap>(tag: K): SVGElementTagNameMap[K] {
  return document.createElementNS(SVG_NS, tag);
}

export function renderHeatmap(
  container: HTMLElement,
  payload: RegionsPayload,
  stories: Story[],
  selectedRegion: string | null,
  handlers: HeatmapHandlers,
): void {
  container.textContent = "";

  const svg = svgElement("svg");
  svg.setAttribute("viewBox", `0 0 ${MAP_WIDTH} ${MAP_HEIGHT}`);
  svg.setAttribute("class", "heatmap");
  svg.setAttribute("role", "img");

  const background = svgElement("rect");
  background.setAttribute("class", "map-background");
  background.setAttribute("width", String(MAP_WIDTH));
  background.setAttribute("height", String(MAP_HEIGHT));
  background.setAttribute("fill", "transparent");
  background.addEventListener("click", () => handlers.onBackgroundClick());
  svg.appendChild(background);
  container.appendChild(svg);

  if (payload.features.length === 0) {
    const notice = document.createElement("p");
    notice.className = "notice";
    notice.textContent = "No data is published for this view.";
    container.appendChild(notice);
    return;
  }

  const bounds = boundsOf(payload.features);
  if (bounds === null) return;
  const proj = makeProjection(bounds, MAP_WIDTH, MAP_HEIGHT);

  const geometryById = new Map(
    payload.features.map((feature) => [feature.properties.region_id, feature.geometry]),
  );

  for (const feature of payload.features) {
    const regionId = feature.properties.region_id;
    const path = svgElement("path");
    path.setAttribute("d", geometryPath(feature.geometry, proj));
    path.setAttribute("fill", feature.properties.color);
    path.setAttribute("fill-rule", "evenodd");
    path.setAttribute("class", regionId === selectedRegion ? "region selected" : "region");
    path.setAttribute("data-region-id", regionId);
    path.setAttribute("data-value", String(feature.properties.value));
    path.setAttribute("data-z", String(feature.properties.z));
    path.addEventListener("click", (event) => {
      event.stopPropagation();
      handlers.onRegionClick(regionId);
    });
    svg.appendChild(path);
  }

  // One marker per region that has stories, anchored at the polygon centroid.
  const marked = new Set<string>();
  for (const story of stories) {
    if (marked.has(story.region_id)) continue;
    const geometry = geometryById.get(story.region_id);
    if (geometry === undefined) continue; // region not in this view, nowhere to anchor
    marked.add(story.region_id);
    const [lon, lat] = centroidOf(geometry);
    const marker = svgElement("text");
    marker.setAttribute("class", "story-marker");
    marker.setAttribute("x", String(proj.x(lon)));
    marker.setAttribute("y", String(proj.y(lat)));
    marker.setAttribute("text-anchor", "middle");
    marker.setAttribute("data-marker-region", story.region_id);
    marker.textContent = "\u{1F4D6}";
    marker.addEventListener("click", (event) => {
      event.stopPropagation();
      handlers.onMarkerClick(story.region_id);
    });
    svg.appendChild(marker);
  }
}

/**
 * Fixed stops of the published diverging scale, labeled in standard
 * deviations. These mirror the documented API color anchors; the legend
 * explains the scale and plays no part in coloring regions.
 */
export const LEGEND_STOPS: readonly { label: string; color: string }[] = [
  { label: "-1 SD", color: "#2ca25f" },
  { label: "-0.5 SD", color: "#ffff99" },
  { label: "0.5 SD", color: "#fd8d3c" },
  { label: "1 SD", color: "#e31a1c" },
];

export function renderLegend(container: HTMLElement): void {
  container.textContent = "";
  const bar = document.createElement("div");
  bar.className = "legend-bar";
  const ramp = LEGEND_STOPS.map((stop) => stop.color).join(", ");
  bar.style.background = `linear-gradient(to right, ${ramp})`;
  container.appendChild(bar);
  const labels = document.createElement("div");
  labels.className = "legend-labels";
  for (const stop of LEGEND_STOPS) {
    const span = document.createElement("span");
    span.textContent = stop.label;
    labels.appendChild(span);
  }
  container.appendChild(labels);
}
