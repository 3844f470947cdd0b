// Thin typed client for the tracking-service HTTP API. Every number the
// UI renders originates in one of these responses.

import type {
  CatalogEntryDto,
  CounterfactualDraft,
  IntensityRowDto,
  LiveProfileDto,
  Metric,
  ProfileDocument,
  ProfileSummary,
  ReferenceRowDto,
  WhatIfResponse,
} from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    public errorCode: string,
    public status: number,
    public detail: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    public baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await response.json().catch(() => ({}));
    if (!response.ok) {
      const err = data as { message?: string; error_code?: string; detail?: Record<string, unknown> };
      throw new ApiError(
        err.message ?? `request failed (${response.status})`,
        err.error_code ?? "error",
        response.status,
        err.detail ?? {},
      );
    }
    return data as T;
  }

  whatIf(
    profileId: string,
    counterfactual: CounterfactualDraft | null,
    metric: Metric,
    horizon: number,
  ): Promise<WhatIfResponse> {
    return this.request("POST", "/whatif", {
      profile_id: profileId,
      counterfactual,
      metric,
      horizon,
    });
  }

  async listProfiles(): Promise<ProfileSummary[]> {
    const body = await this.request<{ profiles: ProfileSummary[] }>("GET", "/profiles");
    return body.profiles;
  }

  async importProfile(document: unknown): Promise<string> {
    const body = await this.request<{ profile_id: string }>("POST", "/profiles", document);
    return body.profile_id;
  }

  exportProfile(ref: string): Promise<ProfileDocument> {
    return this.request("GET", `/profiles/${ref}/export`);
  }

  async hardwareCatalog(): Promise<CatalogEntryDto[]> {
    const body = await this.request<{ entries: CatalogEntryDto[] }>("GET", "/catalog/hardware");
    return body.entries;
  }

  async intensityTable(): Promise<{ vintage: string; rows: IntensityRowDto[]; gaps: string[] }> {
    return this.request("GET", "/catalog/intensity");
  }

  async referenceRows(): Promise<ReferenceRowDto[]> {
    const body = await this.request<{ rows: ReferenceRowDto[] }>("GET", "/catalog/reference");
    return body.rows;
  }
}

/** Client for a live session URL (possibly on another host than the UI). */
export class LiveSessionClient {
  readonly base: string;

  constructor(
    public sessionUrl: string,
    private fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {
    this.base = sessionUrl.replace(/\/$/, "");
  }

  /** The service root this session lives on, for what-if calls. */
  serviceRoot(): string {
    return this.base.replace(/\/sessions\/[^/]+$/, "");
  }

  sessionId(): string {
    const match = this.base.match(/\/sessions\/([^/]+)$/);
    return match?.[1] ?? "";
  }

  private async post(path: string): Promise<unknown> {
    const response = await this.fetchFn(this.base + path, { method: "POST" });
    if (!response.ok) throw new ApiError(`live call failed`, "live", response.status);
    return response.json();
  }

  async profile(): Promise<LiveProfileDto> {
    const response = await this.fetchFn(this.base + "/profile");
    if (!response.ok) throw new ApiError("live profile fetch failed", "live", response.status);
    return (await response.json()) as LiveProfileDto;
  }

  pause(): Promise<unknown> {
    return this.post("/pause");
  }

  resume(): Promise<unknown> {
    return this.post("/resume");
  }

  halt(): Promise<unknown> {
    return this.post("/halt");
  }
}
