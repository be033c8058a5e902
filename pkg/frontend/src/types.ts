/** Wire types mirroring the backend service's JSON schemas. */

export interface GenerateRequest {
  ingredients: string[];
  model?: string;
  temperature?: number;
  top_k?: number;
  max_new_tokens?: number;
  seed?: number;
}

export interface GenerateResponse {
  model: string;
  title: string;
  /** Rendered lines like "2 cup rice", ready for display. */
  ingredients: string[];
  instructions: string[];
  raw_text: string;
  malformed: boolean;
  seed_used: number;
  finish_reason: string;
  elapsed_ms: number;
}

export interface ModelInfo {
  id: string;
  kind: string;
  vocab_size: number;
  context_len: number;
}

export interface HealthInfo {
  status: string;
  models_loaded: number;
  uptime_s: number;
}

export interface ErrorBody {
  error: {
    code: string;
    message: string;
    field?: string;
  };
}

/** Thrown by the client for any non-2xx response or network failure. */
export class ApiError extends Error {
  /** HTTP status, or 0 when the request never reached the server. */
  readonly status: number;
  readonly code: string;
  readonly field?: string;

  constructor(status: number, code: string, message: string, field?: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.field = field;
  }
}
