// Consumption chart: recorded + extrapolated series for the selected
// profile, an alternative line when a counterfactual or hover preview is
// active, and an overlay line for a right-clicked profile. Values come
// verbatim from what-if responses; this module only maps them to pixels.

import { fmt } from "./format";
import type { Metric, SeriesDto, WhatIfResponse } from "./types";

const WIDTH = 560;
const HEIGHT = 280;
const MARGIN = { top: 16, right: 16, bottom: 30, left: 56 };

export interface ChartHandlers {
  onMetric(metric: Metric): void;
  onHorizon(horizon: number): void;
}

export interface ChartData {
  rendered: WhatIfResponse | null;
  overlay: SeriesDto | null;
  metric: Metric;
  horizon: number;
  previewActive: boolean;
}

interface Scale {
  x(i: number): number;
  y(v: number): number;
}

function allValues(series: SeriesDto): number[] {
  return [...series.recorded, ...series.extrapolated];
}

function makeScale(series: (SeriesDto | null)[]): Scale {
  let maxY = 0;
  let maxX = 1;
  for (const s of series) {
    if (!s) continue;
    for (const v of allValues(s)) maxY = Math.max(maxY, v);
    maxX = Math.max(maxX, allValues(s).length - 1);
  }
  if (maxY === 0) maxY = 1;
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  return {
    x: (i) => MARGIN.left + (maxX === 0 ? 0 : (i / maxX) * plotW),
    y: (v) => MARGIN.top + plotH - (v / maxY) * plotH,
  };
}

function polyline(points: [number, number][], cls: string, values: number[]): string {
  const attr = points.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
  return `<polyline class="${cls}" fill="none" points="${attr}" data-values="${values.join(",")}"></polyline>`;
}

function dots(points: [number, number][], cls: string): string {
  return points
    .map(([x, y]) => `<circle class="${cls}" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="3"></circle>`)
    .join("");
}

function seriesSvg(series: SeriesDto, scale: Scale, kind: "baseline" | "alternative" | "overlay"): string {
  const recordedPts: [number, number][] = series.recorded.map((v, i) => [scale.x(i), scale.y(v)]);
  const n = series.recorded.length;
  let svg = "";
  if (recordedPts.length) {
    svg += polyline(recordedPts, `line-${kind} recorded`, series.recorded);
    svg += dots(recordedPts, `dot-${kind} recorded`);
  }
  if (series.extrapolated.length) {
    const tail: [number, number][] = series.extrapolated.map((v, j) => [
      scale.x(n + j),
      scale.y(v),
    ]);
    const joined = recordedPts.length ? [recordedPts[recordedPts.length - 1]!, ...tail] : tail;
    svg += polyline(joined, `line-${kind} extrapolated`, series.extrapolated);
    svg += dots(tail, `dot-${kind} extrapolated`);
  }
  return svg;
}

export function renderChart(container: HTMLElement, data: ChartData, handlers: ChartHandlers): void {
  const rendered = data.rendered;
  const baseline = rendered?.baseline ?? null;
  const alternative = rendered?.alternative ?? null;
  const scale = makeScale([baseline, alternative, data.overlay]);

  let body = "";
  if (data.overlay) body += seriesSvg(data.overlay, scale, "overlay");
  if (baseline) body += seriesSvg(baseline, scale, "baseline");
  if (alternative) body += seriesSvg(alternative, scale, "alternative");

  const maxVal = Math.max(
    0,
    ...[baseline, alternative, data.overlay].flatMap((s) => (s ? allValues(s) : [])),
  );
  const unit = data.metric === "kwh" ? "kWh" : "lbs CO2";
  const legend = [
    baseline ? `<span class="legend-baseline">selected</span>` : "",
    alternative ? `<span class="legend-alternative">alternative${data.previewActive ? " (preview)" : ""}</span>` : "",
    data.overlay ? `<span class="legend-overlay">overlay</span>` : "",
    baseline?.clamped || alternative?.clamped
      ? `<span class="legend-clamped">fit clamped at 0</span>`
      : "",
  ]
    .filter(Boolean)
    .join(" ");

  container.innerHTML = `
    <div class="chart-toolbar">
      <span class="metric-toggle">
        <button class="metric-kwh ${data.metric === "kwh" ? "active" : ""}">kWh</button>
        <button class="metric-co2 ${data.metric === "co2_lbs" ? "active" : ""}">CO2</button>
      </span>
      <span class="horizon-stepper">
        extrapolated epochs:
        <button class="horizon-minus" ${data.horizon === 0 ? "disabled" : ""}>−</button>
        <span class="horizon-value">${data.horizon}</span>
        <button class="horizon-plus">+</button>
      </span>
    </div>
    <svg viewBox="0 0 ${WIDTH} ${HEIGHT}" class="consumption-chart" role="img">
      <line x1="${MARGIN.left}" y1="${HEIGHT - MARGIN.bottom}" x2="${WIDTH - MARGIN.right}" y2="${HEIGHT - MARGIN.bottom}" class="axis"></line>
      <line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${HEIGHT - MARGIN.bottom}" class="axis"></line>
      <text x="${MARGIN.left - 6}" y="${MARGIN.top + 4}" text-anchor="end" class="axis-label y-max">${fmt(maxVal)}</text>
      <text x="${WIDTH / 2}" y="${HEIGHT - 6}" text-anchor="middle" class="axis-label">epoch (${unit})</text>
      ${body}
    </svg>
    <div class="chart-legend">${legend}</div>`;

  container.querySelector(".metric-kwh")?.addEventListener("click", () => handlers.onMetric("kwh"));
  container.querySelector(".metric-co2")?.addEventListener("click", () => handlers.onMetric("co2_lbs"));
  container
    .querySelector(".horizon-minus")
    ?.addEventListener("click", () => handlers.onHorizon(data.horizon - 1));
  container
    .querySelector(".horizon-plus")
    ?.addEventListener("click", () => handlers.onHorizon(data.horizon + 1));
}
