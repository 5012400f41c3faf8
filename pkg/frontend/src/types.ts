/** Wire types for the read-only snapshot API under /api/v1. */

export type Dataset = "air" | "health";

export interface MetricDescriptor {
  id: string;
  dataset: Dataset;
  label: string;
  units: string;
  higher_is_worse: boolean;
}

export interface MetricsPayload {
  snapshot_id: string;
  metrics: MetricDescriptor[];
}

export interface PolygonGeometry {
  type: "Polygon";
  coordinates: number[][][];
}

export interface MultiPolygonGeometry {
  type: "MultiPolygon";
  coordinates: number[][][][];
}

export type RegionGeometry = PolygonGeometry | MultiPolygonGeometry;

export interface RegionProperties {
  region_id: string;
  metric: string;
  value: number;
  z: number;
  color: string;
  n_deployments?: number;
  n_respondents?: number;
}

export interface RegionFeature {
  type: "Feature";
  geometry: RegionGeometry;
  properties: RegionProperties;
}

export interface RegionsPayload {
  type: "FeatureCollection";
  snapshot_id: string;
  dataset: Dataset;
  features: RegionFeature[];
}

export interface MetricReading {
  value: number;
  z: number;
}

export interface RegionDetailPayload {
  snapshot_id: string;
  region_id: string;
  dataset: Dataset;
  metrics: Record<string, MetricReading>;
  n_deployments?: number;
  n_respondents?: number;
}

export interface ParallelAxis {
  metric_id: string;
  min: number;
  max: number;
}

export interface ParallelRow {
  region_id: string;
  values: number[];
  normalized: number[];
}

export interface ParallelPayload {
  snapshot_id: string;
  dataset: Dataset;
  axes: ParallelAxis[];
  rows: ParallelRow[];
}

export interface Story {
  story_id: string;
  region_id: string;
  title: string;
  body: string;
  image_urls: string[];
  sort_order: number;
}

export interface StoriesPayload {
  snapshot_id: string;
  stories: Story[];
}
