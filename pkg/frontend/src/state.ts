/** View state plus the revision counter that serializes refetches.
 *
 * Every fetch is issued under the revision current at dispatch time, and a
 * response is applied only while that revision is still current. Rapid
 * interactions therefore resolve last-write-wins and stale responses are
 * discarded without touching the view.
 */

import type { Dataset } from "./types.js";

export interface ViewState {
  dataset: Dataset;
  selected_metric: string;
  selected_region: string | null;
  story_index: number;
  snapshot_id: string;
}

export class ViewStore {
  private current: ViewState;
  private counter = 0;

  constructor(initial: ViewState) {
    this.current = { ...initial };
  }

  get state(): ViewState {
    return { ...this.current };
  }

  get revision(): number {
    return this.counter;
  }

  /**
   * Merge a change into the state. Returns the new revision, or null when
   * every field is unchanged; null means no refetch may be triggered.
   */
  apply(change: Partial<ViewState>): number | null {
    const merged = { ...this.current, ...change };
    const same =
      merged.dataset === this.current.dataset &&
      merged.selected_metric === this.current.selected_metric &&
      merged.selected_region === this.current.selected_region &&
      merged.story_index === this.current.story_index &&
      merged.snapshot_id === this.current.snapshot_id;
    if (same) {
      return null;
    }
    this.current = merged;
    this.counter += 1;
    return this.counter;
  }

  isCurrent(revision: number): boolean {
    return revision === this.counter;
  }
}
