/** Mock transport plus canned responses shared by the suites. */

import { Transport } from "../src/api.js";
import { ErrorBody, GenerateResponse } from "../src/types.js";

export interface Call {
  url: string;
  method: string;
  body?: unknown;
}

export interface MockRoute {
  status: number;
  body: unknown;
  /** Resolve only when released; lets tests hold a request in flight. */
  gate?: Promise<void>;
}

/** A scriptable transport: queue responses per path prefix, record calls. */
export class MockTransport {
  readonly calls: Call[] = [];
  private readonly queues = new Map<string, MockRoute[]>();

  route(pathPrefix: string, route: MockRoute): void {
    const queue = this.queues.get(pathPrefix) ?? [];
    queue.push(route);
    this.queues.set(pathPrefix, queue);
  }

  get fn(): Transport {
    return async (url, init) => {
      const method = init?.method ?? "GET";
      const body = init?.body ? JSON.parse(String(init.body)) : undefined;
      this.calls.push({ url, method, body });

      const path = new URL(url, "http://mock").pathname;
      const queue = this.queues.get(path);
      const route = queue && queue.length > 0 ? queue.shift() : undefined;
      if (!route) {
        throw new TypeError(`no mock route for ${method} ${path}`);
      }
      if (route.gate) {
        await route.gate;
      }
      if (init?.signal?.aborted) {
        throw new DOMException("The operation was aborted.", "AbortError");
      }
      return new Response(JSON.stringify(route.body), {
        status: route.status,
        headers: { "content-type": "application/json" },
      });
    };
  }

  bodiesFor(path: string): unknown[] {
    return this.calls
      .filter((c) => new URL(c.url, "http://mock").pathname === path)
      .map((c) => c.body);
  }
}

export function okRecipe(overrides: Partial<GenerateResponse> = {}): GenerateResponse {
  return {
    model: "char-lstm",
    title: "rice bowl",
    ingredients: ["2 cup rice", "1/2 tsp salt"],
    instructions: ["rinse the rice", "simmer until tender", "serve warm"],
    raw_text: "<RECIPE_START> ... <RECIPE_END>",
    malformed: false,
    seed_used: 41,
    finish_reason: "end-tag",
    elapsed_ms: 12.5,
    ...overrides,
  };
}

export function errorBody(code: string, message: string, field?: string): ErrorBody {
  const err: ErrorBody = { error: { code, message } };
  if (field !== undefined) {
    err.error.field = field;
  }
  return err;
}

/** Drain the event loop so fire-and-forget handlers settle. */
export async function settle(rounds = 4): Promise<void> {
  for (let i = 0; i < rounds; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
