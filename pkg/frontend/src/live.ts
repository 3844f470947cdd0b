// Live tracking: poll an attached session's profile once a second and
// surface pause/halt controls. The chart itself re-renders through the
// normal what-if path whenever a new epoch closes.

import { LiveSessionClient } from "./api";
import { fmt } from "./format";
import type { LiveProfileDto } from "./types";

export interface LiveHandlers {
  onEpochCountChange(epochs: number): void;
  onStateChange(state: string): void;
}

export class LivePoller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private lastEpochCount = -1;
  latest: LiveProfileDto | null = null;

  constructor(
    public client: LiveSessionClient,
    private handlers: LiveHandlers,
    private intervalMs = 1000,
  ) {}

  start(): void {
    this.stop();
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async tick(): Promise<void> {
    try {
      const profile = await this.client.profile();
      const previous = this.latest;
      this.latest = profile;
      if (profile.epochs.length !== this.lastEpochCount) {
        this.lastEpochCount = profile.epochs.length;
        this.handlers.onEpochCountChange(profile.epochs.length);
      }
      if (profile.state !== previous?.state) {
        this.handlers.onStateChange(profile.state);
      }
      if (profile.state === "halted") this.stop();
    } catch {
      // transient poll failures are fine; the next tick retries
    }
  }
}

export function renderLiveStatus(container: HTMLElement, poller: LivePoller | null): void {
  if (!poller?.latest) {
    container.innerHTML = "";
    return;
  }
  const profile = poller.latest;
  const open = profile.open_epoch;
  container.innerHTML = `
    <div class="live-status">
      <span class="live-badge state-${profile.state}">${profile.state}</span>
      <span class="live-model">${profile.model_name}</span>
      <span class="live-epochs">${profile.epochs.length} closed epochs</span>
      ${open ? `<span class="live-open">open: <span class="val-open-kwh">${fmt(open.energy_kwh)}</span> kWh @ ${fmt(open.power_w, 1)} W</span>` : ""}
      ${profile.degraded_devices.length ? `<span class="live-degraded">degraded: ${profile.degraded_devices.join(", ")}</span>` : ""}
      <button class="live-pause" ${profile.state !== "running" ? "disabled" : ""}>pause</button>
      <button class="live-resume" ${profile.state !== "paused" ? "disabled" : ""}>resume</button>
      <button class="live-halt" ${profile.state === "halted" ? "disabled" : ""}>halt</button>
    </div>`;

  container.querySelector(".live-pause")?.addEventListener("click", () => {
    void poller.client.pause().then(() => poller.tick());
  });
  container.querySelector(".live-resume")?.addEventListener("click", () => {
    void poller.client.resume().then(() => poller.tick());
  });
  container.querySelector(".live-halt")?.addEventListener("click", () => {
    void poller.client.halt().then(() => poller.tick());
  });
}
