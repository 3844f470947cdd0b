// Application wiring: one store, five coordinated views, one render pass
// per store notification.

import { ApiClient, LiveSessionClient } from "./api";
import { renderChart } from "./chart";
import { renderEquations } from "./equations";
import { fmt } from "./format";
import { renderHardwarePanel } from "./hardware";
import { LivePoller, renderLiveStatus } from "./live";
import { renderMap } from "./map";
import { renderProfilePanel } from "./profiles";
import { AppStore } from "./store";
import type {
  CatalogEntryDto,
  IntensityRowDto,
  Mode,
  ProfileSummary,
  ReferenceRowDto,
} from "./types";

export interface AppElements {
  profiles: HTMLElement;
  chart: HTMLElement;
  map: HTMLElement;
  hardware: HTMLElement;
  equations: HTMLElement;
  live: HTMLElement;
  reference: HTMLElement;
  notice: HTMLElement;
}

export class App {
  store: AppStore;
  profiles: ProfileSummary[] = [];
  catalog: CatalogEntryDto[] = [];
  intensity: IntensityRowDto[] = [];
  reference: ReferenceRowDto[] = [];
  expandedEquations = new Set<string>(["power"]);
  poller: LivePoller | null = null;
  liveState: string | null = null;

  constructor(
    public api: ApiClient,
    public el: AppElements,
    hoverDebounceMs = 150,
  ) {
    this.store = new AppStore(api, { hoverDebounceMs });
    this.store.subscribe(() => this.render());
  }

  async boot(): Promise<void> {
    const results = await Promise.allSettled([
      this.api.listProfiles(),
      this.api.hardwareCatalog(),
      this.api.intensityTable(),
      this.api.referenceRows(),
    ]);
    if (results[0].status === "fulfilled") this.profiles = results[0].value;
    if (results[1].status === "fulfilled") this.catalog = results[1].value;
    if (results[2].status === "fulfilled") this.intensity = results[2].value.rows;
    if (results[3].status === "fulfilled") this.reference = results[3].value;
    if (this.profiles.length && this.profiles[0]) {
      await this.store.selectProfile(this.profiles[0].profile_id);
      await this.loadSelectedHardware();
    } else {
      this.render();
    }
  }

  async refreshProfiles(): Promise<void> {
    try {
      this.profiles = await this.api.listProfiles();
    } catch {
      // keep the stale list; the notice already shows the error
    }
    this.render();
  }

  private selectedProfileRegion(): string | null {
    const rendered = this.store.rendered();
    return rendered?.breakdown.baseline.region_code ?? null;
  }

  /** The selected profile's hardware list, fetched once per selection. */
  profileHardware: { catalog_key: string; quantity: number }[] = [];

  async loadSelectedHardware(): Promise<void> {
    const id = this.store.state.selectedProfile;
    if (!id) {
      this.profileHardware = [];
      return;
    }
    try {
      const doc = await this.api.exportProfile(id);
      this.profileHardware = doc.hardware;
    } catch {
      this.profileHardware = [];
    }
    this.render();
  }

  attachLive(url: string): void {
    this.poller?.stop();
    const client = new LiveSessionClient(url);
    this.store.api = new ApiClient(client.serviceRoot());
    this.store.state.liveUrl = url;
    this.poller = new LivePoller(client, {
      onEpochCountChange: () => {
        if (this.store.state.selectedProfile === client.sessionId()) {
          void this.store.refresh(); // chart grows as epochs close
        } else {
          void this.store.selectProfile(client.sessionId());
        }
      },
      onStateChange: (state) => {
        this.liveState = state;
        this.render();
      },
    });
    this.poller.start();
  }

  render(): void {
    const state = this.store.state;
    const rendered = this.store.rendered();

    renderProfilePanel(
      this.el.profiles,
      {
        mode: state.mode,
        profiles: this.profiles,
        selected: state.selectedProfile,
        overlay: state.overlayProfile,
        liveUrl: state.liveUrl,
        liveState: this.liveState,
      },
      {
        onSelect: (id) => {
          void this.store.selectProfile(id).then(() => this.loadSelectedHardware());
        },
        onOverlay: (id) => void this.store.setOverlay(id),
        onImport: (doc) =>
          void this.api
            .importProfile(doc)
            .then(() => this.refreshProfiles())
            .catch((error) => this.showNotice(String(error))),
        onExport: (id) => void this.exportProfile(id),
        onMode: (mode: Mode) => {
          state.mode = mode;
          this.render();
        },
        onAttach: (url) => this.attachLive(url),
      },
    );

    renderChart(
      this.el.chart,
      {
        rendered,
        overlay: this.store.overlaySeries,
        metric: state.metric,
        horizon: state.horizon,
        previewActive: this.store.preview !== null,
      },
      {
        onMetric: (metric) => void this.store.setMetric(metric),
        onHorizon: (horizon) => void this.store.setHorizon(horizon),
      },
    );

    renderMap(
      this.el.map,
      {
        rows: this.intensity,
        baselineRegion: this.selectedProfileRegion(),
        pinnedRegion: state.counterfactual.alt_region,
      },
      {
        onHover: (code) => void this.store.previewRegion(code),
        onHoverOut: () => this.store.clearPreview(),
        onPin: (code) => void this.store.pinRegion(code),
      },
    );

    renderHardwarePanel(
      this.el.hardware,
      {
        original: this.profileHardware,
        alternative: state.counterfactual.alt_hardware,
        catalog: this.catalog,
      },
      {
        onCommit: (specs) => void this.store.setAltHardware(specs),
      },
    );

    renderEquations(
      this.el.equations,
      { rendered, expanded: this.expandedEquations },
      {
        onPueEdit: (pue) => void this.store.setPue(pue),
        onToggle: (id) => {
          if (this.expandedEquations.has(id)) this.expandedEquations.delete(id);
          else this.expandedEquations.add(id);
          this.render();
        },
      },
    );

    renderLiveStatus(this.el.live, this.poller);
    this.renderReference();
    this.el.notice.textContent = this.store.lastError ?? "";
  }

  private renderReference(): void {
    if (!this.reference.length) {
      this.el.reference.innerHTML = "";
      return;
    }
    this.el.reference.innerHTML = `
      <details class="reference">
        <summary>CO2e context (tons)</summary>
        <table>${this.reference
          .map((r) => `<tr><td>${r.label}</td><td class="num">${fmt(r.co2e_tons, 2)}</td></tr>`)
          .join("")}</table>
      </details>`;
  }

  private async exportProfile(id: string): Promise<void> {
    try {
      const doc = await this.api.exportProfile(id);
      const blob = new Blob([JSON.stringify(doc, null, 2)], { type: "application/json" });
      const link = document.createElement("a");
      link.href = URL.createObjectURL(blob);
      link.download = `${doc.model_name || "profile"}.json`;
      link.click();
      URL.revokeObjectURL(link.href);
    } catch (error) {
      this.showNotice(String(error));
    }
  }

  private showNotice(message: string): void {
    this.el.notice.textContent = message;
  }
}

export function mount(root: Document = document): App {
  const el: AppElements = {
    profiles: root.getElementById("profiles-view")!,
    chart: root.getElementById("chart-view")!,
    map: root.getElementById("map-view")!,
    hardware: root.getElementById("hardware-view")!,
    equations: root.getElementById("equations-view")!,
    live: root.getElementById("live-view")!,
    reference: root.getElementById("reference-view")!,
    notice: root.getElementById("notice-view")!,
  };
  const app = new App(new ApiClient(""), el);
  void app.boot();
  return app;
}

declare global {
  interface Window {
    energyvisApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("chart-view")) {
  window.energyvisApp = mount();
}
