/** Application wiring: one ViewStore, one ApiClient, render on transition.
 *
 * Reference data (metric descriptors, stories, both parallel matrices) is
 * fetched once per load cycle; region colors are refetched on every state
 * transition that needs them. Any payload carrying a snapshot_id other than
 * the one this page loaded under triggers a reload notice instead of mixing
 * snapshots in place.
 */

import { ApiClient, ApiError } from "./api.js";
import { clearBanner, renderErrorBanner, renderReloadNotice } from "./banner.js";
import { renderHeatmap, renderLegend } from "./heatmap.js";
import { renderInfoWindow, type InfoContent } from "./info.js";
import { renderParallel } from "./parallel.js";
import { ViewStore } from "./state.js";
import { firstStoryIndex, nextIndex, prevIndex, renderStorySlider } from "./stories.js";
import type {
  Dataset,
  MetricDescriptor,
  ParallelPayload,
  RegionsPayload,
  Story,
} from "./types.js";

const DEFAULT_METRIC = "peaks_per_day";

interface Elements {
  banner: HTMLElement;
  toggle: HTMLButtonElement;
  map: HTMLElement;
  legend: HTMLElement;
  info: HTMLElement;
  parallel: HTMLElement;
  stories: HTMLElement;
}

function buildLayout(root: HTMLElement): Elements {
  root.textContent = "";

  const banner = document.createElement("div");
  banner.id = "banner";
  banner.className = "banner";
  banner.hidden = true;
  root.appendChild(banner);

  const toolbar = document.createElement("header");
  toolbar.className = "toolbar";
  const heading = document.createElement("h1");
  heading.textContent = "Environmental Health Channel";
  toolbar.appendChild(heading);
  const toggle = document.createElement("button");
  toggle.id = "dataset-toggle";
  toggle.type = "button";
  toggle.disabled = true;
  toggle.textContent = "Loading";
  toolbar.appendChild(toggle);
  root.appendChild(toolbar);

  const map = document.createElement("section");
  map.id = "map";
  root.appendChild(map);

  const legend = document.createElement("div");
  legend.id = "legend";
  root.appendChild(legend);

  const info = document.createElement("section");
  info.id = "info";
  info.hidden = true;
  root.appendChild(info);

  const parallel = document.createElement("section");
  parallel.id = "parallel";
  root.appendChild(parallel);

  const stories = document.createElement("section");
  stories.id = "stories";
  stories.hidden = true;
  root.appendChild(stories);

  return { banner, toggle, map, legend, info, parallel, stories };
}

export class App {
  private readonly api: ApiClient;
  private readonly el: Elements;
  private store: ViewStore;
  private descriptors: MetricDescriptor[] = [];
  private stories: Story[] = [];
  private matrices: Record<Dataset, ParallelPayload | null> = { air: null, health: null };
  private lastRegions: RegionsPayload | null = null;
  private info: InfoContent | null = null;
  private readonly inflight = new Set<Promise<void>>();

  constructor(root: HTMLElement, baseUrl = "") {
    this.api = new ApiClient(baseUrl);
    this.el = buildLayout(root);
    this.store = new ViewStore({
      dataset: "air",
      selected_metric: DEFAULT_METRIC,
      selected_region: null,
      story_index: 0,
      snapshot_id: "",
    });
    this.el.toggle.addEventListener("click", () => {
      void this.track(this.handleDatasetToggle());
    });
  }

  get state() {
    return this.store.state;
  }

  init(): Promise<void> {
    return this.track(this.loadAll());
  }

  /** Resolves once no tracked fetch is pending. Used by tests. */
  async idle(): Promise<void> {
    while (this.inflight.size > 0) {
      await Promise.allSettled(Array.from(this.inflight));
    }
  }

  private track(task: Promise<void>): Promise<void> {
    this.inflight.add(task);
    const drop = () => {
      this.inflight.delete(task);
    };
    task.then(drop, drop);
    return task;
  }

  private async loadAll(): Promise<void> {
    try {
      const metrics = await this.api.metrics();
      const stories = await this.api.stories();
      const air = await this.api.parallel("air");
      const health = await this.api.parallel("health");
      const ids = [stories.snapshot_id, air.snapshot_id, health.snapshot_id];
      if (ids.some((id) => id !== metrics.snapshot_id)) {
        renderReloadNotice(this.el.banner);
        return;
      }

      this.descriptors = metrics.metrics;
      this.stories = stories.stories;
      this.matrices = { air, health };
      const hasDefault = air.axes.some((axis) => axis.metric_id === DEFAULT_METRIC);
      const metric = hasDefault
        ? DEFAULT_METRIC
        : (air.axes[0]?.metric_id ?? DEFAULT_METRIC);
      this.store = new ViewStore({
        dataset: "air",
        selected_metric: metric,
        selected_region: null,
        story_index: 0,
        snapshot_id: metrics.snapshot_id,
      });

      renderLegend(this.el.legend);
      this.syncParallel();
      this.syncSlider();
      this.syncInfo();
      this.updateToggle();
      await this.refreshRegions(this.store.revision);
    } catch (error) {
      this.showError(error, () => {
        void this.track(this.loadAll());
      });
    }
  }

  private async refreshRegions(revision: number): Promise<void> {
    const { dataset, selected_metric } = this.store.state;
    try {
      const payload = await this.api.regions(dataset, selected_metric);
      if (!this.store.isCurrent(revision)) return;
      if (payload.snapshot_id !== this.store.state.snapshot_id) {
        renderReloadNotice(this.el.banner);
        return;
      }
      this.lastRegions = payload;
      this.syncMap();
      clearBanner(this.el.banner);
    } catch (error) {
      if (!this.store.isCurrent(revision)) return;
      this.showError(error, () => {
        void this.track(this.refreshRegions(this.store.revision));
      });
    }
  }

  private async fetchDetail(regionId: string, revision: number): Promise<void> {
    try {
      const detail = await this.api.regionDetail(regionId, this.store.state.dataset);
      if (!this.store.isCurrent(revision)) return;
      if (detail.snapshot_id !== this.store.state.snapshot_id) {
        renderReloadNotice(this.el.banner);
        return;
      }
      this.info = { regionId, detail };
      this.syncInfo();
    } catch (error) {
      if (!this.store.isCurrent(revision)) return;
      if (error instanceof ApiError && error.status === 404) {
        this.info = { regionId, message: "No published data for this region." };
        this.syncInfo();
        return;
      }
      this.showError(error, () => {
        void this.track(this.fetchDetail(regionId, this.store.revision));
      });
    }
  }

  async handleAxisClick(metricId: string): Promise<void> {
    // Clicking the already-selected label is a no-op, not a refetch.
    if (this.store.state.selected_metric === metricId) return;
    const revision = this.store.apply({ selected_metric: metricId });
    if (revision === null) return;
    this.syncParallel();
    await this.refreshRegions(revision);
  }

  async handleDatasetToggle(): Promise<void> {
    const target: Dataset = this.store.state.dataset === "air" ? "health" : "air";
    const matrix = this.matrices[target];
    const first = matrix?.axes[0];
    if (matrix === null || first === undefined) return;
    const revision = this.store.apply({
      dataset: target,
      selected_metric: first.metric_id,
      selected_region: null,
    });
    if (revision === null) return;
    this.info = null;
    this.syncInfo();
    this.syncParallel();
    this.updateToggle();
    await this.refreshRegions(revision);
  }

  async handleRegionClick(regionId: string): Promise<void> {
    const revision = this.store.apply({ selected_region: regionId });
    if (revision === null) return;
    this.syncMap();
    this.syncParallel();
    await this.fetchDetail(regionId, revision);
  }

  handleBackgroundClick(): void {
    const revision = this.store.apply({ selected_region: null });
    if (revision === null) return;
    this.info = null;
    this.syncInfo();
    this.syncMap();
    this.syncParallel();
  }

  handleMarkerClick(regionId: string): void {
    const index = firstStoryIndex(this.stories, regionId);
    if (index === null) return;
    this.store.apply({ story_index: index });
    this.syncSlider();
  }

  handleStoryPrev(): void {
    const index = prevIndex(this.store.state.story_index, this.stories.length);
    this.store.apply({ story_index: index });
    this.syncSlider();
  }

  handleStoryNext(): void {
    const index = nextIndex(this.store.state.story_index, this.stories.length);
    this.store.apply({ story_index: index });
    this.syncSlider();
  }

  private syncMap(): void {
    if (this.lastRegions === null) return;
    renderHeatmap(
      this.el.map,
      this.lastRegions,
      this.stories,
      this.store.state.selected_region,
      {
        onRegionClick: (regionId) => {
          void this.track(this.handleRegionClick(regionId));
        },
        onMarkerClick: (regionId) => this.handleMarkerClick(regionId),
        onBackgroundClick: () => this.handleBackgroundClick(),
      },
    );
  }

  private syncParallel(): void {
    const { dataset, selected_metric, selected_region } = this.store.state;
    const payload = this.matrices[dataset];
    if (payload === null) return;
    renderParallel(this.el.parallel, payload, selected_metric, selected_region, {
      onAxisClick: (metricId) => {
        void this.track(this.handleAxisClick(metricId));
      },
    });
  }

  private syncSlider(): void {
    renderStorySlider(this.el.stories, this.stories, this.store.state.story_index, {
      onPrev: () => this.handleStoryPrev(),
      onNext: () => this.handleStoryNext(),
    });
  }

  private syncInfo(): void {
    renderInfoWindow(this.el.info, this.info, this.descriptors, () =>
      this.handleBackgroundClick(),
    );
  }

  private updateToggle(): void {
    const current = this.store.state.dataset;
    const other: Dataset = current === "air" ? "health" : "air";
    const axes = this.matrices[other]?.axes ?? [];
    this.el.toggle.textContent = other === "health" ? "Show health data" : "Show air data";
    this.el.toggle.dataset["dataset"] = current;
    if (axes.length === 0) {
      this.el.toggle.disabled = true;
      this.el.toggle.title = `No ${other} data is published in this snapshot.`;
    } else {
      this.el.toggle.disabled = false;
      this.el.toggle.removeAttribute("title");
    }
  }

  private showError(error: unknown, onRetry: () => void): void {
    const message =
      error instanceof ApiError
        ? `Data request failed: ${error.message}`
        : "Something went wrong while loading data.";
    renderErrorBanner(this.el.banner, message, onRetry);
  }
}
