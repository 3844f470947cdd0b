// Color equations: the three emission formulas with their live variable
// values, color-keyed consistently across views. Each block expands to an
// annotated explanation; the PUE constant is editable directly in the
// expanded text and commits through the store (one what-if request).

import { fmt } from "./format";
import type { EquationVars, WhatIfResponse } from "./types";

// fixed palette keyed by variable name, shared across all views
export const VARIABLE_COLORS: Record<string, string> = {
  pue: "#8c564b",
  intensity: "#2ca02c",
  kwh: "#1f77b4",
  co2: "#d62728",
  power: "#ff7f0e",
  factor: "#9467bd",
};

export interface EquationHandlers {
  onPueEdit(pue: number): void;
  onToggle(id: string): void;
}

export interface EquationState {
  rendered: WhatIfResponse | null;
  expanded: Set<string>;
}

function span(variable: string, text: string, cls = ""): string {
  const color = VARIABLE_COLORS[variable] ?? "#333";
  return `<span class="eq-var var-${variable} ${cls}" style="color:${color}">${text}</span>`;
}

function pair(base: number | null | undefined, alt: number | null | undefined, digits = 6): string {
  const left = fmt(base ?? null, digits);
  if (alt === undefined || alt === null || alt === base) return left;
  return `${left} → ${fmt(alt, digits)}`;
}

function block(
  id: string,
  title: string,
  formula: string,
  explanation: string,
  expanded: boolean,
): string {
  return `
    <section class="equation ${expanded ? "expanded" : "contracted"}" data-equation="${id}">
      <header class="eq-header" data-equation-toggle="${id}">
        <span class="eq-title">${title}</span>
        <span class="eq-caret">${expanded ? "▾" : "▸"}</span>
      </header>
      <div class="eq-formula">${formula}</div>
      ${expanded ? `<div class="eq-explanation">${explanation}</div>` : ""}
    </section>`;
}

export function renderEquations(
  container: HTMLElement,
  state: EquationState,
  handlers: EquationHandlers,
): void {
  const breakdown = state.rendered?.breakdown;
  const base: EquationVars | null = breakdown?.baseline ?? null;
  const alt: EquationVars | undefined = breakdown?.alternative;

  const pueText = pair(base?.pue, alt?.pue, 2);
  const intensityText = pair(base?.intensity_lbs_per_kwh, alt?.intensity_lbs_per_kwh, 3);
  const kwhText = pair(base?.total_kwh, alt?.total_kwh);
  const co2Text = pair(base?.total_co2_lbs, alt?.total_co2_lbs);
  const factorText = pair(1, alt?.hardware_factor, 4);
  const regionText = alt && alt.region_code !== base?.region_code
    ? `${base?.region_code ?? "?"} → ${alt.region_code}`
    : base?.region_code ?? "?";

  const pueValue = alt?.pue ?? base?.pue ?? 1.0;
  const pueInput = `<input class="pue-input" type="number" min="1" step="0.01" value="${pueValue}">`;

  const eq1 = block(
    "co2",
    "epoch carbon emissions",
    `${span("co2", "CO2 lbs")} = ${span("intensity", "intensity")} × ${span("kwh", "electricity kWh")}`,
    `Each epoch's electricity is multiplied by the training region's energy
     intensity (${span("intensity", `<span class="val-intensity">${intensityText}</span> lbs CO2/kWh`)},
     region ${span("intensity", regionText)}). Over the recorded epochs this run
     emits ${span("co2", `<span class="val-co2">${co2Text}</span> lbs CO2`)}.`,
    state.expanded.has("co2"),
  );

  const eq2 = block(
    "kwh",
    "epoch electricity",
    `${span("kwh", "kWh")} = ∫ ${span("pue", "PUE")} · ${span("power", "power")} dt ÷ 3.6×10⁶`,
    `Sampled power is integrated over each epoch and scaled by the
     datacenter overhead ${span("pue", `PUE = <span class="val-pue">${pueText}</span>`)}.
     Recorded epochs total ${span("kwh", `<span class="val-kwh">${kwhText}</span> kWh`)};
     hardware counterfactuals rescale this by
     ${span("factor", `<span class="val-factor">${factorText}</span>`)}.`,
    state.expanded.has("kwh"),
  );

  const eq3 = block(
    "power",
    "instantaneous power",
    `${span("power", "P")} = ${span("pue", "PUE")} × Σ ${span("power", "device draw")}`,
    `All hardware components' draw summed, times
     ${span("pue", "PUE")} = ${pueInput}. Edit the constant to see every view
     update with the adjusted overhead.`,
    state.expanded.has("power"),
  );

  container.innerHTML = `<div class="equations">${eq1}${eq2}${eq3}</div>`;

  for (const header of Array.from(container.querySelectorAll<HTMLElement>("[data-equation-toggle]"))) {
    header.addEventListener("click", () => handlers.onToggle(header.dataset.equationToggle!));
  }
  const input = container.querySelector<HTMLInputElement>(".pue-input");
  input?.addEventListener("change", () => {
    const value = Number(input.value);
    handlers.onPueEdit(value);
  });
}
