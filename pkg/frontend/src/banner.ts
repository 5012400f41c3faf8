/** Page-level banners: fetch failures with retry, snapshot-change notice. */

export function renderErrorBanner(
  container: HTMLElement,
  message: string,
  onRetry: () => void,
): void {
  container.textContent = "";
  container.hidden = false;
  container.className = "banner error";

  const text = document.createElement("span");
  text.className = "banner-message";
  text.textContent = message;
  container.appendChild(text);

  const retry = document.createElement("button");
  retry.className = "banner-retry";
  retry.type = "button";
  retry.textContent = "Retry";
  retry.addEventListener("click", () => onRetry());
  container.appendChild(retry);
}

export function renderReloadNotice(container: HTMLElement): void {
  container.textContent = "";
  container.hidden = false;
  container.className = "banner reload";

  const text = document.createElement("span");
  text.className = "banner-message";
  text.textContent = "Data updated. Reload the page to see the new snapshot.";
  container.appendChild(text);

  const reload = document.createElement("button");
  reload.className = "banner-reload";
  reload.type = "button";
  reload.textContent = "Reload";
  reload.addEventListener("click", () => window.location.reload());
  container.appendChild(reload);
}

export function clearBanner(container: HTMLElement): void {
  // A pending reload notice must not be cleared by a later successful fetch.
  if (container.className.includes("reload")) return;
  container.hidden = true;
  container.textContent = "";
  container.className = "banner";
}
