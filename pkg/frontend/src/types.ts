// Wire types for the tracking-service API plus the UI's view state.

export type Metric = "kwh" | "co2_lbs";

export interface SeriesDto {
  metric: string;
  recorded: number[];
  extrapolated: number[];
  clamped: boolean;
  fit_slope?: number;
  fit_intercept?: number;
}

export interface EquationVars {
  pue: number;
  region_code: string;
  intensity_lbs_per_kwh: number | null;
  hardware_factor: number;
  epoch_kwh: number[];
  total_kwh: number;
  total_co2_lbs: number | null;
}

export interface WhatIfResponse {
  baseline: SeriesDto;
  alternative: SeriesDto | null;
  breakdown: { baseline: EquationVars; alternative?: EquationVars };
}

export interface HardwareSpecDto {
  catalog_key: string;
  quantity: number;
}

export interface CounterfactualDraft {
  alt_region: string | null;
  alt_hardware: HardwareSpecDto[] | null;
  alt_pue: number | null;
}

export interface ProfileSummary {
  profile_id: string;
  model_name: string;
  region_code: string;
  epochs: number;
  live: boolean;
  created_at: string;
}

export interface EpochDto {
  index: number;
  duration_s: number;
  energy_kwh: number;
  degraded?: boolean;
  paused?: boolean;
}

export interface ProfileDocument {
  schema_version: number;
  model_name: string;
  region_code: string;
  pue: number;
  hardware: HardwareSpecDto[];
  epochs: EpochDto[];
  created_at: string;
  live: boolean;
  [key: string]: unknown;
}

export interface OpenEpochDto {
  index: number;
  started_at_s: number;
  duration_s: number;
  energy_kwh: number;
  samples: number;
  power_w: number;
}

export interface LiveProfileDto extends ProfileDocument {
  state: "running" | "paused" | "halted";
  degraded_devices: string[];
  open_epoch?: OpenEpochDto;
}

export interface CatalogEntryDto {
  name: string;
  kind: string;
  power_draw_w: number;
  flops: number;
}

export interface IntensityRowDto {
  region_code: string;
  intensity_lbs_per_kwh: number;
}

export interface ReferenceRowDto {
  label: string;
  category: string;
  co2e_tons: number;
}

export type Mode = "preloaded" | "live";

export interface ViewState {
  mode: Mode;
  selectedProfile: string | null;
  overlayProfile: string | null;
  counterfactual: CounterfactualDraft;
  metric: Metric;
  horizon: number;
  liveUrl: string | null;
}

export function emptyCounterfactual(): CounterfactualDraft {
  return { alt_region: null, alt_hardware: null, alt_pue: null };
}

/** A draft with no set field is "no counterfactual" on the wire. */
export function draftToWire(draft: CounterfactualDraft): CounterfactualDraft | null {
  if (draft.alt_region === null && draft.alt_hardware === null && draft.alt_pue === null) {
    return null;
  }
  return draft;
}
