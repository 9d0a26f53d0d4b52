/** Wire types mirrored from the analysis service. */

export interface PipelineEvent {
  session_id: string;
  sequence: number;
  stage: string;
  payload: Record<string, unknown>;
  terminal: boolean;
}

export interface SessionRef {
  session_id: string;
  database_id: string;
}

export interface QueryRequest {
  text: string;
  graph_text?: string;
  bindings?: Record<string, [string, string]>;
  treatment?: string;
  outcome?: string;
  injected_sql?: string;
}

export interface ArtifactEnvelope {
  artifact_id: string;
  kind: string; // erd | trace | report | dataset_preview
  body: unknown;
}

export interface HealthInfo {
  status: string;
  databases: string[];
  sessions: number;
}

export interface ServiceError {
  error: string;
  detail: string;
}
