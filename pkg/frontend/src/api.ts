/** Typed client for the recipe service. Transport is injectable so tests
 * can run against a mock; production code passes nothing and gets fetch. */

import {
  ApiError,
  ErrorBody,
  GenerateRequest,
  GenerateResponse,
  HealthInfo,
  ModelInfo,
} from "./types.js";

export type Transport = (url: string, init?: RequestInit) => Promise<Response>;

async function toApiError(resp: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `request failed with status ${resp.status}`;
  let field: string | undefined;
  try {
    const body = (await resp.json()) as ErrorBody;
    if (body && body.error) {
      code = body.error.code;
      message = body.error.message;
      field = body.error.field;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(resp.status, code, message, field);
}

export class ApiClient {
  private readonly base: string;
  private readonly transport: Transport;

  constructor(baseUrl: string, transport?: Transport) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.transport = transport ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(
    path: string,
    init?: RequestInit,
    signal?: AbortSignal,
  ): Promise<T> {
    let resp: Response;
    try {
      resp = await this.transport(this.base + path, { ...init, signal });
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") {
        throw err;
      }
      const message = err instanceof Error ? err.message : String(err);
      throw new ApiError(0, "network", message);
    }
    if (!resp.ok) {
      throw await toApiError(resp);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<HealthInfo> {
    return this.request<HealthInfo>("/health");
  }

  models(): Promise<ModelInfo[]> {
    return this.request<ModelInfo[]>("/models");
  }

  ingredients(prefix: string, signal?: AbortSignal): Promise<string[]> {
    const q = encodeURIComponent(prefix);
    return this.request<string[]>(`/ingredients?q=${q}`, undefined, signal);
  }

  generate(req: GenerateRequest, signal?: AbortSignal): Promise<GenerateResponse> {
    return this.request<GenerateResponse>(
      "/generate",
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(req),
      },
      signal,
    );
  }
}
