import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ApiError } from "../src/types.js";
import { errorBody, MockTransport, okRecipe } from "./helpers.js";

describe("ApiClient", () => {
  it("fetches suggestions with the query encoded", async () => {
    const t = new MockTransport();
    t.route("/ingredients", { status: 200, body: ["rice", "rice flour"] });
    const client = new ApiClient("http://api", t.fn);
    const names = await client.ingredients("ri ce");
    expect(names).toEqual(["rice", "rice flour"]);
    expect(t.calls[0]?.url).toBe("http://api/ingredients?q=ri%20ce");
  });

  it("posts generate bodies as JSON", async () => {
    const t = new MockTransport();
    t.route("/generate", { status: 200, body: okRecipe() });
    const client = new ApiClient("http://api/", t.fn);
    const resp = await client.generate({ ingredients: ["rice"], seed: 3 });
    expect(resp.title).toBe("rice bowl");
    expect(t.calls[0]?.method).toBe("POST");
    expect(t.calls[0]?.body).toEqual({ ingredients: ["rice"], seed: 3 });
    expect(t.calls[0]?.url).toBe("http://api/generate");
  });

  it("turns structured error bodies into ApiError", async () => {
    const t = new MockTransport();
    t.route("/generate", {
      status: 400,
      body: errorBody("bad_request", "ingredient 1 is too long", "ingredients"),
    });
    const client = new ApiClient("http://api", t.fn);
    const err = await client.generate({ ingredients: ["x"] }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.code).toBe("bad_request");
    expect(err.field).toBe("ingredients");
    expect(err.message).toBe("ingredient 1 is too long");
  });

  it("keeps a generic message when the error body is not JSON", async () => {
    const transport = async () => new Response("boom", { status: 500 });
    const client = new ApiClient("http://api", transport);
    const err = await client.health().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(500);
    expect(err.code).toBe("http_error");
  });

  it("maps network failures to status 0", async () => {
    const transport = async () => {
      throw new TypeError("fetch failed");
    };
    const client = new ApiClient("http://api", transport);
    const err = await client.models().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(0);
    expect(err.code).toBe("network");
  });

  it("lets aborts propagate untouched", async () => {
    const transport = async () => {
      throw new DOMException("The operation was aborted.", "AbortError");
    };
    const client = new ApiClient("http://api", transport);
    const err = await client.generate({ ingredients: ["x"] }).catch((e) => e);
    expect(err).toBeInstanceOf(DOMException);
    expect(err.name).toBe("AbortError");
  });
});
