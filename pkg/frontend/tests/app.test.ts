import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import { GenerateRequest } from "../src/types.js";
import { errorBody, MockTransport, okRecipe, settle } from "./helpers.js";

function makeApp(t: MockTransport): App {
  t.route("/models", {
    status: 200,
    body: [
      { id: "char-lstm", kind: "char-lstm", vocab_size: 49, context_len: 96 },
    ],
  });
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  return new App(root, new ApiClient("http://api", t.fn));
}

function typeAndEnter(input: HTMLInputElement, text: string): void {
  input.value = text;
  input.dispatchEvent(new Event("input", { bubbles: true }));
  input.dispatchEvent(new KeyboardEvent("keydown", { key: "Enter", bubbles: true }));
}

function chips(): string[] {
  return [...document.querySelectorAll(".chip")].map(
    (n) => n.childNodes[0]?.textContent ?? "",
  );
}

function generateButton(): HTMLButtonElement {
  return document.querySelector(".generate") as HTMLButtonElement;
}

beforeEach(() => {
  vi.useRealTimers();
});

describe("ingredient picker", () => {
  it("dedupes chips", async () => {
    const t = new MockTransport();
    const app = makeApp(t);
    await settle();

    const picker = document.querySelector(".picker") as HTMLInputElement;
    typeAndEnter(picker, "flour");
    typeAndEnter(picker, "flour");
    typeAndEnter(picker, " FLOUR ");

    expect(chips()).toEqual(["flour"]);
    expect([...app.state.chips]).toEqual(["flour"]);
  });

  it("adds chips from clicked suggestions, once each", async () => {
    vi.useFakeTimers();
    const t = new MockTransport();
    t.route("/ingredients", { status: 200, body: ["flour", "flaxseed"] });
    const app = makeApp(t);
    await vi.advanceTimersByTimeAsync(1);

    const picker = document.querySelector(".picker") as HTMLInputElement;
    picker.value = "fl";
    picker.dispatchEvent(new Event("input", { bubbles: true }));
    await vi.advanceTimersByTimeAsync(200);

    const options = [...document.querySelectorAll(".suggestion")];
    expect(options.map((n) => n.textContent)).toEqual(["flour", "flaxseed"]);
    (options[0] as HTMLElement).click();
    expect([...app.state.chips]).toEqual(["flour"]);
    const lastCall = t.calls[t.calls.length - 1];
    expect(lastCall?.url).toContain("/ingredients?q=fl");
  });

  it("debounces suggestion requests while typing", async () => {
    vi.useFakeTimers();
    const t = new MockTransport();
    t.route("/ingredients", { status: 200, body: ["flour"] });
    makeApp(t);
    await vi.advanceTimersByTimeAsync(1);

    const picker = document.querySelector(".picker") as HTMLInputElement;
    for (const text of ["f", "fl", "flo", "flou"]) {
      picker.value = text;
      picker.dispatchEvent(new Event("input", { bubbles: true }));
      await vi.advanceTimersByTimeAsync(50);
    }
    await vi.advanceTimersByTimeAsync(300);

    const suggestionCalls = t.calls.filter((c) => c.url.includes("/ingredients"));
    expect(suggestionCalls.length).toBe(1);
    expect(suggestionCalls[0]?.url).toContain("q=flou");
  });

  it("stays usable for free text when suggestions fail", async () => {
    vi.useFakeTimers();
    const t = new MockTransport();
    const app = makeApp(t); // no /ingredients route: transport throws
    await vi.advanceTimersByTimeAsync(1);

    const picker = document.querySelector(".picker") as HTMLInputElement;
    picker.value = "dragonfruit";
    picker.dispatchEvent(new Event("input", { bubbles: true }));
    await vi.advanceTimersByTimeAsync(200);

    const banner = document.querySelector(".banner") as HTMLElement;
    expect(banner.hidden).toBe(false);

    typeAndEnter(picker, "dragonfruit");
    expect([...app.state.chips]).toEqual(["dragonfruit"]);
  });
});

describe("generate gating", () => {
  it("disables the button at zero chips and enables with one", async () => {
    const t = new MockTransport();
    const app = makeApp(t);
    await settle();

    expect(generateButton().disabled).toBe(true);

    app.addChip("rice");
    expect(generateButton().disabled).toBe(false);

    const remove = document.querySelector(".chip-remove") as HTMLButtonElement;
    remove.click();
    expect(chips()).toEqual([]);
    expect(generateButton().disabled).toBe(true);
  });
});

describe("generation rendering", () => {
  it("renders title, ingredients, and numbered instructions on 200", async () => {
    const t = new MockTransport();
    t.route("/generate", { status: 200, body: okRecipe() });
    const app = makeApp(t);
    await settle();

    app.addChip("rice");
    app.addChip("salt");
    generateButton().click();
    await settle();

    expect(document.querySelector(".card .title")?.textContent).toBe("rice bowl");
    const items = [...document.querySelectorAll(".card .ingredients li")];
    expect(items.map((n) => n.textContent)).toEqual(["2 cup rice", "1/2 tsp salt"]);
    const steps = document.querySelector(".card .instructions");
    expect(steps?.tagName).toBe("OL");
    expect([...steps!.querySelectorAll("li")].map((n) => n.textContent)).toEqual([
      "rinse the rice",
      "simmer until tender",
      "serve warm",
    ]);
    expect(app.state.history.length).toBe(1);
  });

  it("sends exactly the on-screen chips and controls", async () => {
    const t = new MockTransport();
    t.route("/generate", { status: 200, body: okRecipe() });
    const app = makeApp(t);
    await settle();

    app.addChip("rice");
    app.addChip("kale");
    (document.querySelector("input[name=temperature]") as HTMLInputElement).value = "0.55";
    document
      .querySelector("input[name=temperature]")!
      .dispatchEvent(new Event("change", { bubbles: true }));
    (document.querySelector("input[name=top_k]") as HTMLInputElement).value = "17";
    document
      .querySelector("input[name=top_k]")!
      .dispatchEvent(new Event("change", { bubbles: true }));

    generateButton().click();
    await settle();

    const body = t.bodiesFor("/generate")[0] as GenerateRequest;
    expect(body.ingredients).toEqual(["rice", "kale"]);
    expect(body.temperature).toBe(0.55);
    expect(body.top_k).toBe(17);
    expect(body.model).toBe("char-lstm");
    expect(body.seed).toBeUndefined();
  });

  it("renders raw text with a warning for fully malformed output", async () => {
    const t = new MockTransport();
    t.route("/generate", {
      status: 200,
      body: okRecipe({ malformed: true, title: "", ingredients: [], instructions: [] }),
    });
    const app = makeApp(t);
    await settle();

    app.addChip("rice");
    generateButton().click();
    await settle();

    expect(document.querySelector(".card .warning")).not.toBeNull();
    expect(document.querySelector(".card .raw")?.textContent).toContain("<RECIPE_START>");
  });
});

describe("error handling", () => {
  it("renders a field error on 400 and leaves history unchanged", async () => {
    const t = new MockTransport();
    t.route("/generate", { status: 200, body: okRecipe() });
    t.route("/generate", {
      status: 400,
      body: errorBody("bad_request", "temperature must be <= 4", "temperature"),
    });
    const app = makeApp(t);
    await settle();

    app.addChip("rice");
    generateButton().click();
    await settle();
    expect(app.state.history.length).toBe(1);

    generateButton().click();
    await settle();

    const fieldError = document.querySelector(".field-error") as HTMLElement;
    expect(fieldError.hidden).toBe(false);
    expect(fieldError.textContent).toBe("temperature: temperature must be <= 4");
    expect(app.state.history.length).toBe(1);
    expect(generateButton().disabled).toBe(false);
  });

  it("shows a retryable banner on 5xx without touching history", async () => {
    const t = new MockTransport();
    t.route("/generate", {
      status: 503,
      body: errorBody("no_models", "no checkpoints are loaded"),
    });
    const app = makeApp(t);
    await settle();

    app.addChip("rice");
    generateButton().click();
    await settle();

    const banner = document.querySelector(".banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("try again");
    expect(app.state.history.length).toBe(0);
    expect(generateButton().disabled).toBe(false);
  });
});

describe("regenerate", () => {
  it("issues a second request with a new seed", async () => {
    const t = new MockTransport();
    t.route("/generate", { status: 200, body: okRecipe({ seed_used: 41 }) });
    t.route("/generate", { status: 200, body: okRecipe({ seed_used: 977 }) });
    const app = makeApp(t);
    await settle();

    app.addChip("rice");
    generateButton().click();
    await settle();
    expect(app.state.history.length).toBe(1);

    const regen = document.querySelector(".regenerate") as HTMLButtonElement;
    expect(regen.disabled).toBe(false);
    regen.click();
    await settle();

    const bodies = t.bodiesFor("/generate") as GenerateRequest[];
    expect(bodies.length).toBe(2);
    expect(bodies[0]?.seed).toBeUndefined();
    expect(typeof bodies[1]?.seed).toBe("number");
    expect(bodies[1]?.seed).not.toBe(41);
    expect(app.state.history.length).toBe(2);
    expect(app.state.history[1]?.seed_used).toBe(977);
  });
});

describe("in-flight behavior", () => {
  it("prevents double submit and supports cancel; stale responses are dropped", async () => {
    const t = new MockTransport();
    let release!: () => void;
    const gate = new Promise<void>((resolve) => {
      release = resolve;
    });
    t.route("/generate", { status: 200, body: okRecipe(), gate });
    const app = makeApp(t);
    await settle();

    app.addChip("rice");
    generateButton().click();
    await settle();

    expect(generateButton().disabled).toBe(true);
    const cancel = document.querySelector(".cancel") as HTMLButtonElement;
    expect(cancel.disabled).toBe(false);

    cancel.click();
    release();
    await settle();

    expect(app.state.history.length).toBe(0);
    expect(app.state.busy).toBe(false);
    expect(generateButton().disabled).toBe(false);
  });
});
