// Thin fetch client. Role headers mirror the server's access model; errors
// carry the server's {code, message} body.

import type {
  AnomaliesResponse,
  CompareResponse,
  ConsumptionResponse,
  ForecastResponse,
  MetersResponse,
  ProfileResponse,
  SegmentsResponse,
  ThresholdResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface Session {
  role: "utility" | "customer";
  meterId?: string; // the customer's own meter
}

export class ApiRequestError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly session: Session,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
    private readonly base = "",
  ) {}

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "X-Role": this.session.role };
    if (this.session.meterId) headers["X-Meter-Id"] = this.session.meterId;
    return headers;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      ...init,
      headers: { ...this.headers(), ...(init?.headers ?? {}) },
    });
    const text = await response.text();
    const body = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const message = body?.message ?? `request failed (${response.status})`;
      throw new ApiRequestError(response.status, message);
    }
    return body as T;
  }

  meters(): Promise<MetersResponse> {
    return this.request("/meters");
  }

  consumption(
    meterId: string,
    granularity: string,
    fn = "sum",
    range?: { from?: string; to?: string },
  ): Promise<ConsumptionResponse> {
    return this.request(
      `/meters/${encodeURIComponent(meterId)}/consumption?` +
        query({ granularity, fn, from: range?.from, to: range?.to }),
    );
  }

  compare(
    meterId: string,
    granularity: string,
    range?: { from?: string; to?: string },
  ): Promise<CompareResponse> {
    return this.request(
      `/meters/${encodeURIComponent(meterId)}/compare?` +
        query({ granularity, from: range?.from, to: range?.to }),
    );
  }

  profile(meterId: string): Promise<ProfileResponse> {
    return this.request(`/meters/${encodeURIComponent(meterId)}/profile`);
  }

  forecast(meterId: string, method: string, horizon: number): Promise<ForecastResponse> {
    return this.request(
      `/meters/${encodeURIComponent(meterId)}/forecast?` + query({ method, horizon }),
    );
  }

  segments(k: number, seed = 0): Promise<SegmentsResponse> {
    return this.request(`/segments?` + query({ k, seed }));
  }

  anomalies(meterId: string, flaggedOnly = false): Promise<AnomaliesResponse> {
    return this.request(
      `/meters/${encodeURIComponent(meterId)}/anomalies?` +
        query({ flagged_only: flaggedOnly }),
    );
  }

  threshold(meterId: string): Promise<ThresholdResponse> {
    return this.request(`/meters/${encodeURIComponent(meterId)}/threshold`);
  }

  setThreshold(meterId: string, epsilon: number): Promise<ThresholdResponse> {
    return this.request(`/meters/${encodeURIComponent(meterId)}/threshold`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ epsilon }),
    });
  }
}

function query(params: Record<string, string | number | boolean | undefined>): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined) search.set(key, String(value));
  }
  return search.toString();
}
