/** Shared test helpers: fixture loading, a route-table fetch stub, DOM query
 * shorthands. Fixtures are byte captures from the real API; regenerate them
 * with `npm run fixtures`.
 */

import { readFileSync } from "node:fs";
import { resolve } from "node:path";

import { App } from "../src/app.js";

export function fixtureText(name: string): string {
  return readFileSync(resolve("tests", "fixtures", name), "utf-8");
}

export function fixtureJson<T>(name: string): T {
  return JSON.parse(fixtureText(name)) as T;
}

export interface Route {
  body: string;
  status?: number;
  /** When set, the response is held back until this promise resolves. */
  gate?: Promise<void>;
}

export type RouteTable = Map<string, Route>;

export function defaultRoutes(): RouteTable {
  return new Map<string, Route>([
    ["/api/v1/metrics", { body: fixtureText("metrics.json") }],
    ["/api/v1/stories", { body: fixtureText("stories.json") }],
    ["/api/v1/parallel?dataset=air", { body: fixtureText("parallel-air.json") }],
    ["/api/v1/parallel?dataset=health", { body: fixtureText("parallel-health.json") }],
    [
      "/api/v1/regions?dataset=air&metric=peaks_per_day",
      { body: fixtureText("regions-air-peaks_per_day.json") },
    ],
    [
      "/api/v1/regions?dataset=air&metric=mean",
      { body: fixtureText("regions-air-mean.json") },
    ],
    [
      "/api/v1/regions?dataset=air&metric=max",
      { body: fixtureText("regions-air-max.json") },
    ],
    [
      "/api/v1/regions?dataset=health&metric=anxiety",
      { body: fixtureText("regions-health-anxiety.json") },
    ],
    ["/api/v1/regions/15001?dataset=air", { body: fixtureText("region-15001-air.json") }],
    [
      "/api/v1/regions/15001?dataset=health",
      { body: fixtureText("region-15001-health.json") },
    ],
    [
      "/api/v1/regions/15003?dataset=air",
      { body: fixtureText("error-region-15003-air.json"), status: 404 },
    ],
  ]);
}

/** Route table for a snapshot that published no health data at all. */
export function airOnlyRoutes(): RouteTable {
  return new Map<string, Route>([
    ["/api/v1/metrics", { body: fixtureText("metrics-air-only.json") }],
    ["/api/v1/stories", { body: fixtureText("stories-air-only.json") }],
    ["/api/v1/parallel?dataset=air", { body: fixtureText("parallel-air-only.json") }],
    ["/api/v1/parallel?dataset=health", { body: fixtureText("parallel-health-empty.json") }],
    [
      "/api/v1/regions?dataset=air&metric=peaks_per_day",
      { body: fixtureText("regions-air-only-peaks.json") },
    ],
  ]);
}

export interface FetchLog {
  calls: string[];
}

/** Install a fetch stub backed by the route table; returns the call log. */
export function installFetch(routes: RouteTable): FetchLog {
  const log: FetchLog = { calls: [] };
  globalThis.fetch = (async (input: RequestInfo | URL) => {
    const url = String(input);
    const path = url.startsWith("http") ? url.slice(url.indexOf("/", 8)) : url;
    log.calls.push(path);
    const route = routes.get(path);
    if (route === undefined) {
      const body = JSON.stringify({
        status: 500,
        code: "unmocked",
        message: `no fixture route for ${path}`,
      });
      return new Response(body, {
        status: 500,
        headers: { "content-type": "application/json" },
      });
    }
    if (route.gate !== undefined) await route.gate;
    return new Response(route.body, {
      status: route.status ?? 200,
      headers: { "content-type": "application/json" },
    });
  }) as typeof fetch;
  return log;
}

export interface Mounted {
  app: App;
  root: HTMLElement;
  log: FetchLog;
}

export async function mountApp(routes: RouteTable = defaultRoutes()): Promise<Mounted> {
  document.body.innerHTML = "";
  const log = installFetch(routes);
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = new App(root);
  await app.init();
  await app.idle();
  return { app, root, log };
}

export function click(el: Element): void {
  el.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

export function fillOf(root: HTMLElement, regionId: string): string | null {
  const path = root.querySelector(`path[data-region-id="${regionId}"]`);
  return path === null ? null : path.getAttribute("fill");
}

export function axisLabels(root: HTMLElement): string[] {
  return Array.from(root.querySelectorAll(".axis-label")).map(
    (el) => el.textContent ?? "",
  );
}

export function axisLabel(root: HTMLElement, metricId: string): Element {
  const el = root.querySelector(`.axis-label[data-metric-id="${metricId}"]`);
  if (el === null) throw new Error(`no axis label for ${metricId}`);
  return el;
}

export function regionPath(root: HTMLElement, regionId: string): Element {
  const el = root.querySelector(`path[data-region-id="${regionId}"]`);
  if (el === null) throw new Error(`no polygon for ${regionId}`);
  return el;
}

export function marker(root: HTMLElement, regionId: string): Element {
  const el = root.querySelector(`[data-marker-region="${regionId}"]`);
  if (el === null) throw new Error(`no marker for ${regionId}`);
  return el;
}

export function regionsFetchCount(log: FetchLog): number {
  return log.calls.filter((path) => path.startsWith("/api/v1/regions?")).length;
}
