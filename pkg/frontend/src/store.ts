// Central view state and request coordination.
//
// Contracts the views rely on:
//  - a committed change (profile, region, hardware, PUE, metric, horizon)
//    issues exactly one what-if request for the selected profile, and every
//    view re-renders from that single response;
//  - hover previews are debounced, never touch pinned state, and hover-out
//    re-renders from the cached pinned response with no network call;
//  - at most one in-flight what-if is honored: stale responses are dropped
//    by sequence number;
//  - the overlay profile has its own baseline series, re-fetched only when
//    the overlay, metric, or horizon changes (counterfactual edits cannot
//    affect another profile's recorded data).

import { ApiClient } from "./api";
import type {
  CounterfactualDraft,
  HardwareSpecDto,
  Metric,
  SeriesDto,
  ViewState,
  WhatIfResponse,
} from "./types";
import { draftToWire, emptyCounterfactual } from "./types";

export type Listener = () => void;

export interface StoreOptions {
  hoverDebounceMs?: number;
}

export class AppStore {
  state: ViewState = {
    mode: "preloaded",
    selectedProfile: null,
    overlayProfile: null,
    counterfactual: emptyCounterfactual(),
    metric: "kwh",
    horizon: 0,
    liveUrl: null,
  };

  /** Last committed what-if response; the single source of rendered data. */
  pinned: WhatIfResponse | null = null;
  /** Transient hover preview; rendered on top of pinned without replacing it. */
  preview: WhatIfResponse | null = null;
  /** The overlay profile's own baseline at the current metric/horizon. */
  overlaySeries: SeriesDto | null = null;
  lastError: string | null = null;

  private seq = 0;
  private previewSeq = 0;
  private overlayFetchSeq = 0;
  private hoverTimer: ReturnType<typeof setTimeout> | null = null;
  private hoverSettled: (() => void) | null = null;
  private listeners: Listener[] = [];
  private hoverDebounceMs: number;

  constructor(
    public api: ApiClient,
    options: StoreOptions = {},
  ) {
    this.hoverDebounceMs = options.hoverDebounceMs ?? 150;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  // -- committed changes ---------------------------------------------------

  async selectProfile(profileId: string | null): Promise<void> {
    this.state.selectedProfile = profileId;
    this.state.counterfactual = emptyCounterfactual();
    this.preview = null;
    await this.refresh();
  }

  async setOverlay(profileId: string | null): Promise<void> {
    this.state.overlayProfile = profileId === this.state.overlayProfile ? null : profileId;
    await this.refreshOverlay();
    this.notify();
  }

  async setMetric(metric: Metric): Promise<void> {
    if (metric === this.state.metric) return;
    this.state.metric = metric;
    await Promise.all([this.refresh(), this.refreshOverlay()]);
  }

  async setHorizon(horizon: number): Promise<void> {
    const clamped = Math.max(0, Math.round(horizon));
    if (clamped === this.state.horizon) return;
    this.state.horizon = clamped;
    await Promise.all([this.refresh(), this.refreshOverlay()]);
  }

  async pinRegion(code: string | null): Promise<void> {
    this.cancelHover();
    this.state.counterfactual.alt_region =
      code === this.state.counterfactual.alt_region ? null : code;
    this.preview = null;
    await this.refresh();
  }

  async setPue(pue: number | null): Promise<void> {
    // validate the draft before it ever reaches the wire
    if (pue !== null && (!Number.isFinite(pue) || pue < 1)) {
      this.lastError = "PUE must be a number >= 1";
      this.notify();
      return;
    }
    this.state.counterfactual.alt_pue = pue;
    await this.refresh();
  }

  async setAltHardware(specs: HardwareSpecDto[] | null): Promise<void> {
    if (specs !== null && specs.some((s) => !s.catalog_key || s.quantity < 1)) {
      this.lastError = "hardware rows need a device and a quantity >= 1";
      this.notify();
      return;
    }
    this.state.counterfactual.alt_hardware = specs && specs.length ? specs : null;
    await this.refresh();
  }

  async clearCounterfactual(): Promise<void> {
    this.state.counterfactual = emptyCounterfactual();
    this.preview = null;
    await this.refresh();
  }

  /** The one committed-path request. */
  async refresh(): Promise<void> {
    const profileId = this.state.selectedProfile;
    if (!profileId) {
      this.pinned = null;
      this.preview = null;
      this.notify();
      return;
    }
    const ticket = ++this.seq;
    try {
      const response = await this.api.whatIf(
        profileId,
        draftToWire(this.state.counterfactual),
        this.state.metric,
        this.state.horizon,
      );
      if (ticket !== this.seq) return; // stale; a newer change superseded us
      this.pinned = response;
      this.preview = null;
      this.lastError = null;
    } catch (error) {
      if (ticket !== this.seq) return;
      this.lastError = error instanceof Error ? error.message : String(error);
    }
    this.notify();
  }

  private async refreshOverlay(): Promise<void> {
    const overlayId = this.state.overlayProfile;
    if (!overlayId) {
      this.overlaySeries = null;
      return;
    }
    const ticket = ++this.overlayFetchSeq;
    try {
      const response = await this.api.whatIf(overlayId, null, this.state.metric, this.state.horizon);
      if (ticket !== this.overlayFetchSeq) return;
      this.overlaySeries = response.baseline;
    } catch {
      if (ticket !== this.overlayFetchSeq) return;
      this.overlaySeries = null;
    }
  }

  // -- hover previews --------------------------------------------------------

  /**
   * Preview a region under the cursor: debounced, layered over the pinned
   * counterfactual draft, and guaranteed not to mutate it.
   */
  previewRegion(code: string): Promise<void> {
    this.cancelHover();
    return new Promise((resolve) => {
      this.hoverSettled = resolve;
      this.hoverTimer = setTimeout(async () => {
        this.hoverTimer = null;
        const profileId = this.state.selectedProfile;
        const ticket = ++this.previewSeq;
        try {
          if (!profileId) return;
          const draft: CounterfactualDraft = { ...this.state.counterfactual, alt_region: code };
          const response = await this.api.whatIf(
            profileId,
            draftToWire(draft),
            this.state.metric,
            this.state.horizon,
          );
          if (ticket === this.previewSeq && this.hoverTimer === null) {
            this.preview = response;
            this.notify();
          }
        } catch {
          // a failed preview simply never appears
        } finally {
          if (this.hoverSettled === resolve) this.hoverSettled = null;
          resolve();
        }
      }, this.hoverDebounceMs);
    });
  }

  /** Hover-out: drop the preview and re-render from pinned. No network. */
  clearPreview(): void {
    this.cancelHover();
    this.previewSeq++; // anything still in flight is now stale
    if (this.preview !== null) {
      this.preview = null;
    }
    this.notify();
  }

  private cancelHover(): void {
    if (this.hoverTimer !== null) {
      clearTimeout(this.hoverTimer);
      this.hoverTimer = null;
    }
    if (this.hoverSettled !== null) {
      this.hoverSettled();
      this.hoverSettled = null;
    }
  }

  // -- data the views render -------------------------------------------------

  /** The response all views should currently draw from. */
  rendered(): WhatIfResponse | null {
    return this.preview ?? this.pinned;
  }
}
