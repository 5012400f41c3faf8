/** Parallel coordinate plot: one axis per metric, one polyline per region. */

import type { ParallelPayload } from "./types.js";

export const PC_WIDTH = 800;
export const PC_HEIGHT = 280;

const TOP = 52;
const BOTTOM = 28;
const SIDE = 70;

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ParallelHandlers {
  onAxisClick(metricId: string): void;
}

function svgElement<K extends keyof SVGElementTagNameMap>(tag: K): SVGElementTagNameMap[K] {
  return document.createElementNS(SVG_NS, tag);
}

export function renderParallel(
  container: HTMLElement,
  payload: ParallelPayload,
  selectedMetric: string,
  selectedRegion: string | null,
  handlers: ParallelHandlers,
): void {
  container.textContent = "";
  if (payload.axes.length === 0) {
    const notice = document.createElement("p");
    notice.className = "notice";
    notice.textContent = "No metrics are published for this dataset.";
    container.appendChild(notice);
    return;
  }

  const svg = svgElement("svg");
  svg.setAttribute("viewBox", `0 0 ${PC_WIDTH} ${PC_HEIGHT}`);
  svg.setAttribute("class", "parallel");

  const innerHeight = PC_HEIGHT - TOP - BOTTOM;
  const axisX = (i: number): number =>
    payload.axes.length === 1
      ? PC_WIDTH / 2
      : SIDE + (i * (PC_WIDTH - 2 * SIDE)) / (payload.axes.length - 1);
  const yFor = (normalized: number): number => TOP + (1 - normalized) * innerHeight;

  // Lines first so the axis labels stay clickable above them.
  for (const row of payload.rows) {
    const points = row.normalized
      .map((v, i) => `${axisX(i).toFixed(2)},${yFor(v).toFixed(2)}`)
      .join(" ");
    const line = svgElement("polyline");
    line.setAttribute("points", points);
    line.setAttribute("fill", "none");
    line.setAttribute(
      "class",
      row.region_id === selectedRegion ? "pc-line selected" : "pc-line",
    );
    line.setAttribute("data-region-id", row.region_id);
    svg.appendChild(line);
  }

  payload.axes.forEach((axis, i) => {
    const x = axisX(i);
    const rule = svgElement("line");
    rule.setAttribute("class", "pc-axis");
    rule.setAttribute("x1", String(x));
    rule.setAttribute("x2", String(x));
    rule.setAttribute("y1", String(TOP));
    rule.setAttribute("y2", String(TOP + innerHeight));
    svg.appendChild(rule);

    const label = svgElement("text");
    label.setAttribute(
      "class",
      axis.metric_id === selectedMetric ? "axis-label selected" : "axis-label",
    );
    label.setAttribute("x", String(x));
    label.setAttribute("y", "20");
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("data-metric-id", axis.metric_id);
    label.textContent = axis.metric_id;
    label.addEventListener("click", () => handlers.onAxisClick(axis.metric_id));
    svg.appendChild(label);

    const high = svgElement("text");
    high.setAttribute("class", "axis-range");
    high.setAttribute("x", String(x));
    high.setAttribute("y", String(TOP - 8));
    high.setAttribute("text-anchor", "middle");
    high.textContent = String(axis.max);
    svg.appendChild(high);

    const low = svgElement("text");
    low.setAttribute("class", "axis-range");
    low.setAttribute("x", String(x));
    low.setAttribute("y", String(TOP + innerHeight + 18));
    low.setAttribute("text-anchor", "middle");
    low.textContent = String(axis.min);
    svg.appendChild(low);
  });

  container.appendChild(svg);
}
