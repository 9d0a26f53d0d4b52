/** Typed fetch wrapper over the service's HTTP endpoints. */

import type {
  ArtifactEnvelope,
  HealthInfo,
  PipelineEvent,
  QueryRequest,
  ServiceError,
  SessionRef,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    detail: string,
  ) {
    super(`${kind}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let kind = `http ${response.status}`;
      let detail = response.statusText;
      try {
        const body = (await response.json()) as ServiceError;
        kind = body.error ?? kind;
        detail = body.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, kind, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<HealthInfo> {
    return this.request<HealthInfo>("/health");
  }

  createSession(databaseId: string): Promise<SessionRef> {
    return this.post<SessionRef>("/sessions", { database_id: databaseId });
  }

  async submitQuery(
    sessionId: string,
    query: QueryRequest,
  ): Promise<PipelineEvent[]> {
    const out = await this.post<{ events: PipelineEvent[] }>(
      `/sessions/${sessionId}/query`,
      query,
    );
    return out.events;
  }

  async submitFeedback(
    sessionId: string,
    text: string,
  ): Promise<PipelineEvent[]> {
    const out = await this.post<{ events: PipelineEvent[] }>(
      `/sessions/${sessionId}/feedback`,
      { text },
    );
    return out.events;
  }

  async eventsAfter(
    sessionId: string,
    after: number,
  ): Promise<PipelineEvent[]> {
    const out = await this.request<{ events: PipelineEvent[] }>(
      `/sessions/${sessionId}/events?after=${after}`,
    );
    return out.events;
  }

  artifact(sessionId: string, artifactId: string): Promise<ArtifactEnvelope> {
    return this.request<ArtifactEnvelope>(
      `/sessions/${sessionId}/artifacts/${artifactId}`,
    );
  }
}
