// Profile view: pick a profile, right-click another as an overlay
// (dashed-orange highlight), import documents, export the selection, and
// flip between preloaded and live-tracking modes with the link button.

import type { Mode, ProfileSummary } from "./types";

export interface ProfileHandlers {
  onSelect(profileId: string): void;
  onOverlay(profileId: string): void;
  onImport(document: unknown): void;
  onExport(profileId: string): void;
  onMode(mode: Mode): void;
  onAttach(url: string): void;
}

export interface ProfilePanelState {
  mode: Mode;
  profiles: ProfileSummary[];
  selected: string | null;
  overlay: string | null;
  liveUrl: string | null;
  liveState: string | null;
}

export function renderProfilePanel(
  container: HTMLElement,
  state: ProfilePanelState,
  handlers: ProfileHandlers,
): void {
  const items = state.profiles
    .map((p) => {
      const classes = ["profile-button"];
      if (p.profile_id === state.selected) classes.push("selected");
      if (p.profile_id === state.overlay) classes.push("overlay"); // dashed orange border
      return `
        <button class="${classes.join(" ")}" data-profile="${p.profile_id}"
                title="left-click: select; right-click: overlay as alternative">
          <span class="profile-name">${p.model_name}</span>
          <span class="profile-meta">${p.epochs} epochs · ${p.region_code}${p.live ? " · live" : ""}</span>
        </button>`;
    })
    .join("");

  const preloaded = `
    <div class="profile-list">${items || '<p class="empty">no stored profiles yet</p>'}</div>
    <div class="profile-actions">
      <label class="import-label">import <input type="file" class="import-input" accept=".json"></label>
      <button class="export-button" ${state.selected ? "" : "disabled"}>export selected</button>
    </div>`;

  const live = `
    <div class="live-attach">
      <input type="text" class="live-url" placeholder="paste the session URL printed by the tracker"
             value="${state.liveUrl ?? ""}">
      <button class="attach-button">attach</button>
      ${state.liveState ? `<span class="live-state">state: ${state.liveState}</span>` : ""}
    </div>`;

  container.innerHTML = `
    <header class="panel-header">
      <span>${state.mode === "preloaded" ? "energy profiles" : "live tracking"}</span>
      <button class="mode-link" title="switch between preloaded and live tracking">🔗</button>
    </header>
    ${state.mode === "preloaded" ? preloaded : live}`;

  container.querySelector(".mode-link")?.addEventListener("click", () => {
    handlers.onMode(state.mode === "preloaded" ? "live" : "preloaded");
  });

  for (const button of Array.from(container.querySelectorAll<HTMLButtonElement>(".profile-button"))) {
    const id = button.dataset.profile!;
    button.addEventListener("click", () => handlers.onSelect(id));
    button.addEventListener("contextmenu", (event) => {
      event.preventDefault();
      handlers.onOverlay(id);
    });
  }

  container.querySelector(".export-button")?.addEventListener("click", () => {
    if (state.selected) handlers.onExport(state.selected);
  });

  const importInput = container.querySelector<HTMLInputElement>(".import-input");
  importInput?.addEventListener("change", async () => {
    const file = importInput.files?.[0];
    if (!file) return;
    try {
      handlers.onImport(JSON.parse(await file.text()));
    } catch {
      // invalid JSON: the service-side validation message never happens;
      // surface a minimal notice instead
      container.querySelector(".profile-actions")?.insertAdjacentHTML(
        "beforeend",
        '<p class="notice error">import failed: not valid JSON</p>',
      );
    }
  });

  const attach = container.querySelector<HTMLButtonElement>(".attach-button");
  attach?.addEventListener("click", () => {
    const url = container.querySelector<HTMLInputElement>(".live-url")?.value.trim();
    if (url) handlers.onAttach(url);
  });
}
