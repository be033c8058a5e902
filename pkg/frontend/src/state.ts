/** Session state: chosen ingredient chips, sampling controls, the history
 * of generations received this session, and the in-flight request marker.
 *
 * Invariants enforced here rather than in the DOM layer:
 * - chips are ordered and unique (case-insensitive on the trimmed text);
 * - generation requires at least one chip and no other request in flight;
 * - history is append-only and only grows on success;
 * - a completion only lands if its token matches the current in-flight
 *   token, so cancelled or superseded responses are dropped.
 */

import { GenerateRequest, GenerateResponse } from "./types.js";

export interface SamplingControls {
  model?: string;
  temperature: number;
  topK: number;
  maxNewTokens: number;
}

export const DEFAULT_CONTROLS: SamplingControls = {
  temperature: 0.8,
  topK: 40,
  maxNewTokens: 512,
};

interface InFlight {
  token: number;
  controller: AbortController;
}

export class SessionState {
  private chipList: string[] = [];
  controls: SamplingControls = { ...DEFAULT_CONTROLS };
  private readonly historyList: GenerateResponse[] = [];
  private inFlight: InFlight | null = null;
  private nextToken = 1;

  get chips(): readonly string[] {
    return this.chipList;
  }

  get history(): readonly GenerateResponse[] {
    return this.historyList;
  }

  get busy(): boolean {
    return this.inFlight !== null;
  }

  /** Add a chip; duplicates of an existing chip are ignored. Returns
   * whether the list changed. */
  addChip(raw: string): boolean {
    const name = raw.trim().replace(/\s+/g, " ");
    if (!name) {
      return false;
    }
    const key = name.toLowerCase();
    if (this.chipList.some((c) => c.toLowerCase() === key)) {
      return false;
    }
    this.chipList.push(name);
    return true;
  }

  removeChip(name: string): boolean {
    const before = this.chipList.length;
    this.chipList = this.chipList.filter((c) => c !== name);
    return this.chipList.length !== before;
  }

  get canGenerate(): boolean {
    return this.chipList.length > 0 && !this.busy;
  }

  /** The request body for the current screen state. `seed` is only set for
   * regeneration; a plain generate lets the server pick one. */
  buildRequest(seed?: number): GenerateRequest {
    const req: GenerateRequest = {
      ingredients: [...this.chipList],
      temperature: this.controls.temperature,
      top_k: this.controls.topK,
      max_new_tokens: this.controls.maxNewTokens,
    };
    if (this.controls.model !== undefined) {
      req.model = this.controls.model;
    }
    if (seed !== undefined) {
      req.seed = seed;
    }
    return req;
  }

  /** A seed for regeneration, guaranteed different from the given one. */
  freshSeed(previous?: number, draw: () => number = Math.random): number {
    for (;;) {
      const seed = Math.floor(draw() * 2 ** 31);
      if (seed !== previous) {
        return seed;
      }
    }
  }

  /** Mark a request as started; at most one may be in flight. */
  beginRequest(): { token: number; signal: AbortSignal } {
    if (this.inFlight) {
      throw new Error("a generation is already in flight");
    }
    const controller = new AbortController();
    this.inFlight = { token: this.nextToken++, controller };
    return { token: this.inFlight.token, signal: controller.signal };
  }

  /** Land a successful response. Stale tokens (cancelled or superseded
   * requests) are dropped and history is untouched. */
  completeRequest(token: number, resp: GenerateResponse): boolean {
    if (!this.inFlight || this.inFlight.token !== token) {
      return false;
    }
    this.inFlight = null;
    this.historyList.push(resp);
    return true;
  }

  /** Clear the in-flight marker after a failure. History is untouched. */
  failRequest(token: number): boolean {
    if (!this.inFlight || this.inFlight.token !== token) {
      return false;
    }
    this.inFlight = null;
    return true;
  }

  /** Abort the in-flight request, if any. Its response will be stale. */
  cancel(): boolean {
    if (!this.inFlight) {
      return false;
    }
    const { controller } = this.inFlight;
    this.inFlight = null;
    controller.abort();
    return true;
  }

  get lastResponse(): GenerateResponse | undefined {
    return this.historyList[this.historyList.length - 1];
  }
}
