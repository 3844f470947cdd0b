// Whole-app coordination against a stubbed service: the map-hover preview
// contract, the single-request PUE edit, and number traceability (every
// rendered value originates in a service response).

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { App, type AppElements } from "../src/main";
import {
  profileDocument,
  profileSummary,
  series,
  StubService,
  vars,
  whatIf,
} from "./stub";

function skeleton(): AppElements {
  document.body.innerHTML = `
    <div id="notice-view"></div>
    <div id="profiles-view"></div>
    <div id="chart-view"></div>
    <div id="map-view"></div>
    <div id="hardware-view"></div>
    <div id="equations-view"></div>
    <div id="live-view"></div>
    <div id="reference-view"></div>`;
  return {
    profiles: document.getElementById("profiles-view")!,
    chart: document.getElementById("chart-view")!,
    map: document.getElementById("map-view")!,
    hardware: document.getElementById("hardware-view")!,
    equations: document.getElementById("equations-view")!,
    live: document.getElementById("live-view")!,
    reference: document.getElementById("reference-view")!,
    notice: document.getElementById("notice-view")!,
  };
}

async function bootApp(stub: StubService): Promise<App> {
  stub.profiles = [profileSummary("p-1", "fixture-model")];
  stub.documents["p-1"] = profileDocument("fixture-model");
  const app = new App(new ApiClient("", stub.fetch), skeleton(), 0);
  await app.boot();
  return app;
}

function altLine(el: HTMLElement): SVGPolylineElement | null {
  return el.querySelector<SVGPolylineElement>("polyline.line-alternative.recorded");
}

async function hover(app: App, el: AppElements, code: string): Promise<void> {
  const tile = el.map.querySelector(`g.state-tile[data-code="${code}"]`)!;
  tile.dispatchEvent(new MouseEvent("mouseenter"));
  await app.store.previewRegion(code); // same debounced path the listener used
}

describe("map hover preview (stubbed service)", () => {
  let stub: StubService;
  let app: App;

  beforeEach(async () => {
    stub = new StubService();
    stub.onWhatIf = () => whatIf(series([0.001, 0.002]));
    app = await bootApp(stub);
  });

  it("renders an alternative line whose values equal the stubbed response", async () => {
    const stubAlt = [0.0005, 0.001];
    stub.onWhatIf = (request) =>
      request.body.counterfactual?.alt_region === "WY"
        ? whatIf(series([0.001, 0.002]), series(stubAlt), {
            baseline: vars(),
            alternative: vars({ region_code: "WY", intensity_lbs_per_kwh: 2.0 }),
          })
        : whatIf(series([0.001, 0.002]));

    expect(altLine(app.el.chart)).toBeNull();
    await hover(app, app.el, "WY");
    const line = altLine(app.el.chart);
    expect(line).not.toBeNull();
    expect(line!.getAttribute("data-values")).toBe(stubAlt.join(","));
  });

  it("hover-out restores the prior render exactly, with no extra request", async () => {
    const before = app.el.chart.innerHTML;
    stub.onWhatIf = () => whatIf(series([0.001, 0.002]), series([0.009, 0.018]));
    await hover(app, app.el, "WY");
    expect(app.el.chart.innerHTML).not.toBe(before);

    const requestsBefore = stub.requests.length;
    const tile = app.el.map.querySelector('g.state-tile[data-code="WY"]')!;
    tile.dispatchEvent(new MouseEvent("mouseleave"));
    expect(app.el.chart.innerHTML).toBe(before); // exact restore
    expect(stub.requests.length).toBe(requestsBefore); // zero network
  });

  it("hovering never mutates the pinned counterfactual draft", async () => {
    await hover(app, app.el, "CA");
    expect(app.store.state.counterfactual.alt_region).toBeNull();
    const tile = app.el.map.querySelector('g.state-tile[data-code="CA"]')!;
    tile.dispatchEvent(new MouseEvent("mouseleave"));
    expect(app.store.state.counterfactual.alt_region).toBeNull();
  });

  it("clicking pins the region and the pin survives hover-out", async () => {
    const tile = app.el.map.querySelector('g.state-tile[data-code="WY"]')!;
    tile.dispatchEvent(new MouseEvent("click"));
    await new Promise((resolve) => setTimeout(resolve, 20)); // refresh round trip
    expect(app.store.state.counterfactual.alt_region).toBe("WY");
    const repainted = app.el.map.querySelector('g.state-tile[data-code="WY"]')!;
    expect(repainted.classList.contains("pinned-region")).toBe(true);
  });
});

describe("PUE edit in the expanded color equation", () => {
  it("fires exactly one what-if and updates chart and equations from it", async () => {
    const stub = new StubService();
    stub.onWhatIf = () => whatIf(series([0.001, 0.002]));
    const app = await bootApp(stub);
    app.expandedEquations.add("kwh"); // the block showing PUE and kWh values
    app.render();

    const edited = whatIf(series([0.001, 0.002]), series([0.0017, 0.0034]), {
      baseline: vars(),
      alternative: vars({ pue: 1.7, total_kwh: 0.0051 }),
    });
    stub.onWhatIf = () => edited;
    stub.requests = [];

    const input = app.el.equations.querySelector<HTMLInputElement>(".pue-input")!;
    input.value = "1.7";
    input.dispatchEvent(new Event("change"));
    await new Promise((resolve) => setTimeout(resolve, 20));

    expect(stub.whatIfCalls()).toHaveLength(1);
    expect(stub.whatIfCalls()[0]!.body.counterfactual.alt_pue).toBe(1.7);
    // chart drew the response's alternative series
    expect(altLine(app.el.chart)!.getAttribute("data-values")).toBe("0.0017,0.0034");
    // equations show the response's PUE pair, not a locally computed value
    expect(app.el.equations.querySelector(".val-pue")!.textContent).toContain("1.7");
    expect(app.el.equations.querySelector(".val-kwh")!.textContent).toContain("0.0051");
  });

  it("rejects an invalid PUE without any request", async () => {
    const stub = new StubService();
    const app = await bootApp(stub);
    stub.requests = [];
    const input = app.el.equations.querySelector<HTMLInputElement>(".pue-input")!;
    input.value = "0.3";
    input.dispatchEvent(new Event("change"));
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(stub.whatIfCalls()).toHaveLength(0);
    expect(app.el.notice.textContent).toMatch(/PUE/);
  });
});

describe("number traceability (zero client-side emission math)", () => {
  it("every chart value is verbatim from the service response", async () => {
    const stub = new StubService();
    const baselineValues = [0.00123, 0.00456, 0.00789];
    const extrapolatedValues = [0.0101, 0.0123];
    stub.onWhatIf = () => whatIf(series(baselineValues, extrapolatedValues));
    const app = await bootApp(stub);

    const lines = Array.from(
      app.el.chart.querySelectorAll<SVGPolylineElement>("polyline[data-values]"),
    );
    const rendered = lines.flatMap((line) =>
      line.getAttribute("data-values")!.split(",").map(Number),
    );
    const fromResponse = new Set([...baselineValues, ...extrapolatedValues]);
    expect(rendered.length).toBeGreaterThan(0);
    for (const value of rendered) {
      expect(fromResponse.has(value)).toBe(true);
    }
  });

  it("equation values are verbatim breakdown fields", async () => {
    const stub = new StubService();
    const breakdown = {
      baseline: vars({
        pue: 1.33,
        intensity_lbs_per_kwh: 0.777,
        total_kwh: 0.0424,
        total_co2_lbs: 0.0329448,
      }),
    };
    stub.onWhatIf = () => whatIf(series([0.02, 0.0224]), null, breakdown);
    const app = await bootApp(stub);
    app.expandedEquations.add("co2");
    app.expandedEquations.add("kwh");
    app.render();

    const text = (selector: string) =>
      app.el.equations.querySelector(selector)!.textContent ?? "";
    expect(text(".val-pue")).toBe("1.33");
    expect(text(".val-intensity")).toBe("0.777");
    expect(text(".val-kwh")).toBe("0.0424");
    expect(text(".val-co2")).toBe("0.032945"); // fixed 6-digit formatting
  });
});

describe("map data states", () => {
  it("states missing from the intensity table render hatched and unselectable", async () => {
    const stub = new StubService();
    stub.intensityRows = [{ region_code: "GA", intensity_lbs_per_kwh: 0.9 }];
    const app = await bootApp(stub);
    stub.requests = [];

    const missing = app.el.map.querySelector('g.state-tile[data-code="WY"]')!;
    expect(missing.classList.contains("missing")).toBe(true);
    missing.dispatchEvent(new MouseEvent("mouseenter"));
    missing.dispatchEvent(new MouseEvent("click"));
    await new Promise((resolve) => setTimeout(resolve, 20));
    expect(stub.whatIfCalls()).toHaveLength(0); // no listeners attached
    expect(app.store.state.counterfactual.alt_region).toBeNull();

    const known = app.el.map.querySelector('g.state-tile[data-code="GA"]')!;
    expect(known.classList.contains("missing")).toBe(false);
  });
});

describe("profile interactions", () => {
  it("right-click overlays a profile with the dashed-orange class", async () => {
    const stub = new StubService();
    stub.profiles = [profileSummary("p-1", "one"), profileSummary("p-2", "two")];
    stub.documents["p-1"] = profileDocument("one");
    const app = new App(new ApiClient("", stub.fetch), skeleton(), 0);
    await app.boot();

    const second = app.el.profiles.querySelector<HTMLButtonElement>('[data-profile="p-2"]')!;
    second.dispatchEvent(new MouseEvent("contextmenu", { cancelable: true }));
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(app.store.state.overlayProfile).toBe("p-2");
    const repainted = app.el.profiles.querySelector('[data-profile="p-2"]')!;
    expect(repainted.classList.contains("overlay")).toBe(true);
    // the overlay series rendered as its own chart line
    expect(app.el.chart.querySelector("polyline.line-overlay")).not.toBeNull();
  });

  it("the link button flips between preloaded and live modes", async () => {
    const stub = new StubService();
    const app = await bootApp(stub);
    app.el.profiles.querySelector<HTMLButtonElement>(".mode-link")!.click();
    expect(app.store.state.mode).toBe("live");
    expect(app.el.profiles.querySelector(".live-url")).not.toBeNull();
    app.el.profiles.querySelector<HTMLButtonElement>(".mode-link")!.click();
    expect(app.store.state.mode).toBe("preloaded");
  });
});
