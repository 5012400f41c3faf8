/** Thin fetch client for the snapshot API. Read-only, no retries, no cache. */

import type {
  Dataset,
  MetricsPayload,
  ParallelPayload,
  RegionDetailPayload,
  RegionsPayload,
  StoriesPayload,
} from "./types.js";

interface ErrorBody {
  status: number;
  code: string;
  message: string;
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

async function getJson<T>(url: string): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url);
  } catch {
    throw new ApiError(0, "network", "could not reach the data service");
  }
  if (!response.ok) {
    let body: Partial<ErrorBody> = {};
    try {
      body = (await response.json()) as Partial<ErrorBody>;
    } catch {
      // non-JSON error body; fall back to a generic message below
    }
    throw new ApiError(
      response.status,
      body.code ?? "http_error",
      body.message ?? `request failed with status ${response.status}`,
    );
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  metrics(): Promise<MetricsPayload> {
    return getJson(`${this.base}/api/v1/metrics`);
  }

  regions(dataset: Dataset, metric: string): Promise<RegionsPayload> {
    const query = `dataset=${encodeURIComponent(dataset)}&metric=${encodeURIComponent(metric)}`;
    return getJson(`${this.base}/api/v1/regions?${query}`);
  }

  regionDetail(regionId: string, dataset: Dataset): Promise<RegionDetailPayload> {
    const id = encodeURIComponent(regionId);
    return getJson(`${this.base}/api/v1/regions/${id}?dataset=${dataset}`);
  }

  parallel(dataset: Dataset): Promise<ParallelPayload> {
    return getJson(`${this.base}/api/v1/parallel?dataset=${dataset}`);
  }

  stories(): Promise<StoriesPayload> {
    return getJson(`${this.base}/api/v1/stories`);
  }
}
