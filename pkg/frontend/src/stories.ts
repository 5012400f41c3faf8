/** Story slider: ordered narratives with wraparound navigation. */

import type { Story } from "./types.js";

export function nextIndex(index: number, count: number): number {
  return count > 0 ? (index + 1) % count : 0;
}

export function prevIndex(index: number, count: number): number {
  return count > 0 ? (index - 1 + count) % count : 0;
}

/**
 * Index of the region's first story. The list arrives sorted by sort_order,
 * so the first match is the lowest-ordered story for that region.
 */
export function firstStoryIndex(stories: Story[], regionId: string): number | null {
  const index = stories.findIndex((story) => story.region_id === regionId);
  return index === -1 ? null : index;
}

export interface SliderHandlers {
  onPrev(): void;
  onNext(): void;
}

export function renderStorySlider(
  container: HTMLElement,
  stories: Story[],
  index: number,
  handlers: SliderHandlers,
): void {
  container.textContent = "";
  if (stories.length === 0) {
    container.hidden = true;
    return;
  }
  container.hidden = false;
  const story = stories[index];
  if (story === undefined) return;

  const nav = document.createElement("div");
  nav.className = "story-nav";

  const prev = document.createElement("button");
  prev.className = "story-prev";
  prev.type = "button";
  prev.textContent = "Previous";
  prev.addEventListener("click", () => handlers.onPrev());
  nav.appendChild(prev);

  const counter = document.createElement("span");
  counter.className = "story-counter";
  counter.textContent = `${index + 1} / ${stories.length}`;
  nav.appendChild(counter);

  const next = document.createElement("button");
  next.className = "story-next";
  next.type = "button";
  next.textContent = "Next";
  next.addEventListener("click", () => handlers.onNext());
  nav.appendChild(next);

  container.appendChild(nav);

  const card = document.createElement("article");
  card.className = "story";
  card.dataset["storyId"] = story.story_id;
  card.dataset["regionId"] = story.region_id;

  const title = document.createElement("h3");
  title.className = "story-title";
  title.textContent = story.title;
  card.appendChild(title);

  const region = document.createElement("p");
  region.className = "story-region";
  region.textContent = `ZIP ${story.region_id}`;
  card.appendChild(region);

  const body = document.createElement("p");
  body.className = "story-body";
  body.textContent = story.body;
  card.appendChild(body);

  for (const url of story.image_urls) {
    const image = document.createElement("img");
    image.className = "story-image";
    image.src = url;
    image.alt = story.title;
    card.appendChild(image);
  }

  container.appendChild(card);
}
