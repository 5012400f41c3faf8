/** Region info window fed by the region detail endpoint. */

import type { MetricDescriptor, RegionDetailPayload } from "./types.js";

export interface InfoContent {
  regionId: string;
  detail?: RegionDetailPayload;
  message?: string;
}

export function renderInfoWindow(
  container: HTMLElement,
  content: InfoContent | null,
  descriptors: MetricDescriptor[],
  onClose: () => void,
): void {
  container.textContent = "";
  if (content === null) {
    container.hidden = true;
    return;
  }
  container.hidden = false;

  const header = document.createElement("div");
  header.className = "info-header";

  const title = document.createElement("h3");
  title.className = "info-title";
  title.textContent = `ZIP ${content.regionId}`;
  header.appendChild(title);

  const close = document.createElement("button");
  close.className = "info-close";
  close.type = "button";
  close.textContent = "Close";
  close.addEventListener("click", () => onClose());
  header.appendChild(close);

  container.appendChild(header);

  if (content.message !== undefined) {
    const message = document.createElement("p");
    message.className = "info-message";
    message.textContent = content.message;
    container.appendChild(message);
    return;
  }

  const detail = content.detail;
  if (detail === undefined) return;

  const labels = new Map(
    descriptors
      .filter((descriptor) => descriptor.dataset === detail.dataset)
      .map((descriptor) => [descriptor.id, descriptor]),
  );

  const table = document.createElement("table");
  table.className = "info-metrics";
  for (const [metricId, reading] of Object.entries(detail.metrics)) {
    const descriptor = labels.get(metricId);
    const row = document.createElement("tr");
    row.dataset["metricId"] = metricId;

    const name = document.createElement("th");
    name.textContent = descriptor?.label ?? metricId;
    row.appendChild(name);

    const value = document.createElement("td");
    value.className = "info-value";
    const units = descriptor?.units ? ` ${descriptor.units}` : "";
    value.textContent = `${reading.value}${units}`;
    row.appendChild(value);

    const z = document.createElement("td");
    z.className = "info-z";
    z.textContent = `z = ${reading.z}`;
    row.appendChild(z);

    table.appendChild(row);
  }
  container.appendChild(table);

  const contributors = document.createElement("p");
  contributors.className = "info-contributors";
  if (detail.n_deployments !== undefined) {
    contributors.textContent = `${detail.n_deployments} sensor deployments`;
  } else if (detail.n_respondents !== undefined) {
    contributors.textContent = `${detail.n_respondents} survey respondents`;
  }
  container.appendChild(contributors);
}
