/** DOM wiring: builds the interface inside a root element and connects it
 * to the service client through the session state. No framework; every
 * update re-renders the affected region from state. */

import { ApiClient } from "./api.js";
import { debounce } from "./debounce.js";
import { SessionState } from "./state.js";
import { ApiError, GenerateResponse } from "./types.js";

const SUGGEST_DEBOUNCE_MS = 150;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export class App {
  readonly state = new SessionState();
  private readonly client: ApiClient;
  private readonly root: HTMLElement;

  private chipsRow!: HTMLElement;
  private picker!: HTMLInputElement;
  private suggestions!: HTMLUListElement;
  private modelSelect!: HTMLSelectElement;
  private temperatureInput!: HTMLInputElement;
  private topKInput!: HTMLInputElement;
  private maxTokensInput!: HTMLInputElement;
  private generateButton!: HTMLButtonElement;
  private cancelButton!: HTMLButtonElement;
  private regenerateButton!: HTMLButtonElement;
  private fieldError!: HTMLElement;
  private banner!: HTMLElement;
  private card!: HTMLElement;
  private historyRail!: HTMLElement;

  private readonly suggest = debounce((q: string) => {
    void this.fetchSuggestions(q);
  }, SUGGEST_DEBOUNCE_MS);

  constructor(root: HTMLElement, client: ApiClient) {
    this.root = root;
    this.client = client;
    this.build();
    this.refresh();
    void this.loadModels();
  }

  private build(): void {
    this.root.replaceChildren();

    this.banner = el("div", "banner");
    this.banner.hidden = true;

    this.chipsRow = el("div", "chips");

    this.picker = el("input", "picker");
    this.picker.type = "text";
    this.picker.placeholder = "type an ingredient";
    this.picker.addEventListener("input", () => {
      const q = this.picker.value.trim();
      if (q) {
        this.suggest(q);
      } else {
        this.suggest.cancel();
        this.renderSuggestions([]);
      }
    });
    this.picker.addEventListener("keydown", (ev) => {
      if (ev.key === "Enter" && this.picker.value.trim()) {
        this.addChip(this.picker.value);
      }
    });

    this.suggestions = el("ul", "suggestions");

    const controls = el("div", "controls");
    this.modelSelect = el("select", "model");
    this.temperatureInput = this.numberInput("temperature", "0.8", "0.05");
    this.topKInput = this.numberInput("top_k", "40", "1");
    this.maxTokensInput = this.numberInput("max_new_tokens", "512", "16");
    controls.append(
      this.labeled("model", this.modelSelect),
      this.labeled("temperature", this.temperatureInput),
      this.labeled("top k", this.topKInput),
      this.labeled("max tokens", this.maxTokensInput),
    );

    this.generateButton = el("button", "generate", "generate");
    this.generateButton.addEventListener("click", () => {
      void this.generate();
    });
    this.cancelButton = el("button", "cancel", "cancel");
    this.cancelButton.addEventListener("click", () => {
      this.state.cancel();
      this.refresh();
    });
    this.regenerateButton = el("button", "regenerate", "regenerate");
    this.regenerateButton.addEventListener("click", () => {
      void this.regenerate();
    });

    this.fieldError = el("div", "field-error");
    this.fieldError.hidden = true;

    this.card = el("article", "card");
    this.historyRail = el("aside", "history");

    const actions = el("div", "actions");
    actions.append(this.generateButton, this.cancelButton, this.regenerateButton);

    this.root.append(
      this.banner,
      this.chipsRow,
      this.picker,
      this.suggestions,
      controls,
      actions,
      this.fieldError,
      this.card,
      this.historyRail,
    );
  }

  private numberInput(name: string, value: string, step: string): HTMLInputElement {
    const input = el("input");
    input.type = "number";
    input.name = name;
    input.value = value;
    input.step = step;
    input.addEventListener("change", () => this.readControls());
    return input;
  }

  private labeled(text: string, input: HTMLElement): HTMLLabelElement {
    const label = el("label", undefined, text + " ");
    label.append(input);
    return label;
  }

  private readControls(): void {
    this.state.controls.temperature = Number(this.temperatureInput.value);
    this.state.controls.topK = Number(this.topKInput.value);
    this.state.controls.maxNewTokens = Number(this.maxTokensInput.value);
    const model = this.modelSelect.value;
    this.state.controls.model = model ? model : undefined;
  }

  private async loadModels(): Promise<void> {
    try {
      const models = await this.client.models();
      this.modelSelect.replaceChildren();
      for (const m of models) {
        const opt = el("option", undefined, m.id);
        opt.value = m.id;
        this.modelSelect.append(opt);
      }
      if (models.length > 0 && models[0]) {
        this.state.controls.model = models[0].id;
      }
    } catch (err) {
      this.showBanner(err, "could not list models");
    }
  }

  private async fetchSuggestions(q: string): Promise<void> {
    try {
      const names = await this.client.ingredients(q);
      this.renderSuggestions(names);
      this.hideBanner();
    } catch (err) {
      // Picker stays usable for free text when the backend is unreachable.
      this.renderSuggestions([]);
      this.showBanner(err, "suggestions unavailable");
    }
  }

  addChip(name: string): void {
    if (this.state.addChip(name)) {
      this.picker.value = "";
      this.renderSuggestions([]);
      this.refresh();
    } else {
      this.picker.value = "";
    }
  }

  async generate(seed?: number): Promise<void> {
    if (!this.state.canGenerate) {
      return;
    }
    this.clearFieldError();
    const body = this.state.buildRequest(seed);
    const { token, signal } = this.state.beginRequest();
    this.refresh();
    try {
      const resp = await this.client.generate(body, signal);
      if (this.state.completeRequest(token, resp)) {
        this.renderCard(resp);
        this.renderHistory();
      }
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") {
        return; // cancelled; state already cleared
      }
      this.state.failRequest(token);
      if (err instanceof ApiError && err.status >= 400 && err.status < 500) {
        this.showFieldError(err);
      } else {
        this.showBanner(err, "generation failed, try again");
      }
    } finally {
      this.refresh();
    }
  }

  async regenerate(): Promise<void> {
    const last = this.state.lastResponse;
    const seed = this.state.freshSeed(last?.seed_used);
    await this.generate(seed);
  }

  private renderSuggestions(names: string[]): void {
    this.suggestions.replaceChildren();
    for (const name of names) {
      const item = el("li", "suggestion", name);
      item.addEventListener("click", () => this.addChip(name));
      this.suggestions.append(item);
    }
  }

  private renderChips(): void {
    this.chipsRow.replaceChildren();
    for (const chip of this.state.chips) {
      const node = el("span", "chip", chip);
      const remove = el("button", "chip-remove", "x");
      remove.setAttribute("aria-label", `remove ${chip}`);
      remove.addEventListener("click", () => {
        this.state.removeChip(chip);
        this.refresh();
      });
      node.append(remove);
      this.chipsRow.append(node);
    }
  }

  private renderCard(resp: GenerateResponse): void {
    this.card.replaceChildren();
    if (resp.malformed) {
      const warning = el("p", "warning", "model output was not a clean recipe");
      this.card.append(warning);
    }
    if (resp.malformed && !resp.title && resp.ingredients.length === 0) {
      this.card.append(el("pre", "raw", resp.raw_text));
      return;
    }
    this.card.append(el("h2", "title", resp.title || "(untitled)"));
    const list = el("ul", "ingredients");
    for (const line of resp.ingredients) {
      list.append(el("li", undefined, line));
    }
    this.card.append(list);
    const steps = el("ol", "instructions");
    for (const step of resp.instructions) {
      steps.append(el("li", undefined, step));
    }
    this.card.append(steps);
    const meta = el(
      "p",
      "meta",
      `${resp.model} · seed ${resp.seed_used} · ${resp.finish_reason}`,
    );
    this.card.append(meta);
  }

  private renderHistory(): void {
    this.historyRail.replaceChildren();
    this.state.history.forEach((resp, i) => {
      const entry = el(
        "div",
        "history-entry",
        `${i + 1}. ${resp.title || "(untitled)"} [seed ${resp.seed_used}]`,
      );
      entry.addEventListener("click", () => this.renderCard(resp));
      this.historyRail.append(entry);
    });
  }

  private showFieldError(err: ApiError): void {
    this.fieldError.hidden = false;
    const where = err.field ? `${err.field}: ` : "";
    this.fieldError.textContent = `${where}${err.message}`;
  }

  private clearFieldError(): void {
    this.fieldError.hidden = true;
    this.fieldError.textContent = "";
  }

  private showBanner(err: unknown, fallback: string): void {
    const message = err instanceof Error ? err.message : fallback;
    this.banner.hidden = false;
    this.banner.textContent = `${fallback} (${message})`;
  }

  private hideBanner(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
  }

  /** Sync control enablement with state. */
  private refresh(): void {
    this.renderChips();
    this.generateButton.disabled = !this.state.canGenerate;
    this.cancelButton.disabled = !this.state.busy;
    this.regenerateButton.disabled =
      this.state.busy || this.state.history.length === 0 || this.state.chips.length === 0;
  }
}

export function mount(root: HTMLElement, baseUrl: string): App {
  return new App(root, new ApiClient(baseUrl));
}
