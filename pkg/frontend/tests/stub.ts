// Programmable stand-in for the tracking service: routes the UI's fetch
// calls, records every request, and lets tests control responses.

import type {
  EquationVars,
  ProfileDocument,
  ProfileSummary,
  SeriesDto,
  WhatIfResponse,
} from "../src/types";

export function series(
  recorded: number[],
  extrapolated: number[] = [],
  metric = "kwh",
): SeriesDto {
  return { metric, recorded, extrapolated, clamped: false };
}

export function vars(overrides: Partial<EquationVars> = {}): EquationVars {
  return {
    pue: 1.0,
    region_code: "GA",
    intensity_lbs_per_kwh: 0.9,
    hardware_factor: 1.0,
    epoch_kwh: [0.001, 0.002],
    total_kwh: 0.003,
    total_co2_lbs: 0.0027,
    ...overrides,
  };
}

export function whatIf(
  baseline: SeriesDto,
  alternative: SeriesDto | null = null,
  breakdown?: WhatIfResponse["breakdown"],
): WhatIfResponse {
  return {
    baseline,
    alternative,
    breakdown: breakdown ?? {
      baseline: vars(),
      ...(alternative ? { alternative: vars() } : {}),
    },
  };
}

export interface RecordedRequest {
  method: string;
  path: string;
  body: any;
}

type Responder = (request: RecordedRequest) => unknown;

export class StubService {
  requests: RecordedRequest[] = [];
  profiles: ProfileSummary[] = [];
  documents: Record<string, ProfileDocument> = {};
  intensityRows = [
    { region_code: "GA", intensity_lbs_per_kwh: 0.9 },
    { region_code: "WY", intensity_lbs_per_kwh: 2.0 },
    { region_code: "CA", intensity_lbs_per_kwh: 0.45 },
  ];
  hardwareEntries = [
    { name: "OriginalGPU", kind: "gpu", power_draw_w: 250, flops: 14e12 },
    { name: "AlternativeGPU", kind: "gpu", power_draw_w: 300, flops: 35e12 },
  ];
  referenceRows = [{ label: "context row", category: "activity", co2e_tons: 0.99 }];

  onWhatIf: Responder = () => whatIf(series([0.001, 0.002]));

  whatIfCalls(): RecordedRequest[] {
    return this.requests.filter((r) => r.path.endsWith("/whatif"));
  }

  fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const url = new URL(input, "http://stub.local");
    const path = url.pathname;
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    const request: RecordedRequest = { method, path, body };
    this.requests.push(request);

    const json = (data: unknown, status = 200) =>
      new Response(JSON.stringify(data), {
        status,
        headers: { "Content-Type": "application/json" },
      });

    if (path === "/whatif") return json(this.onWhatIf(request));
    if (path === "/profiles" && method === "GET") return json({ profiles: this.profiles });
    if (path === "/profiles" && method === "POST") return json({ profile_id: "p-new" });
    const exportMatch = path.match(/^\/profiles\/(.+)\/export$/);
    if (exportMatch) {
      const doc = this.documents[exportMatch[1]!];
      return doc
        ? json(doc)
        : json({ error_code: "not_found", message: "no profile", detail: {} }, 404);
    }
    if (path === "/catalog/hardware") return json({ entries: this.hardwareEntries, warnings: [] });
    if (path === "/catalog/intensity")
      return json({ vintage: "stub", rows: this.intensityRows, gaps: [] });
    if (path === "/catalog/reference") return json({ rows: this.referenceRows });
    return json({ error_code: "not_found", message: `no route ${path}`, detail: {} }, 404);
  };
}

export function profileSummary(id: string, name = id): ProfileSummary {
  return {
    profile_id: id,
    model_name: name,
    region_code: "GA",
    epochs: 2,
    live: false,
    created_at: "2026-01-05T12:00:00+00:00",
  };
}

export function profileDocument(name = "stub-model"): ProfileDocument {
  return {
    schema_version: 1,
    model_name: name,
    region_code: "GA",
    pue: 1.0,
    hardware: [{ catalog_key: "OriginalGPU", quantity: 1 }],
    epochs: [
      { index: 0, duration_s: 60, energy_kwh: 0.001 },
      { index: 1, duration_s: 60, energy_kwh: 0.002 },
    ],
    created_at: "2026-01-05T12:00:00+00:00",
    live: false,
  };
}
