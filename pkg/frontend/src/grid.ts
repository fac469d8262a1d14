import type { ExplorerApi } from "./api.js";
import { LazyThumbnails, type ObserverFactory } from "./lazy.js";
import { pngSrc, type SampleSummary } from "./types.js";

/**
 * Test-split browser. Thumbnails are registered lazily and only get their
 * src once visible; an empty listing and a fetch failure each render an
 * explicit state instead of a blank panel.
 */
export class SampleGrid {
  readonly root: HTMLElement;
  private readonly api: ExplorerApi;
  private readonly onSelect: (sample: SampleSummary) => void;
  private readonly observerFactory: ObserverFactory | undefined;
  private lazy: LazyThumbnails | null = null;
  private selectedId: string | null = null;

  constructor(
    api: ExplorerApi,
    onSelect: (sample: SampleSummary) => void,
    options: { observerFactory?: ObserverFactory; doc?: Document } = {},
  ) {
    this.api = api;
    this.onSelect = onSelect;
    this.observerFactory = options.observerFactory;
    this.root = (options.doc ?? document).createElement("section");
    this.root.className = "sample-grid";
  }

  async load(): Promise<void> {
    this.root.textContent = "loading samples…";
    let samples: SampleSummary[];
    try {
      samples = await this.api.listSamples();
    } catch (err) {
      this.renderRetry(err instanceof Error ? err.message : String(err));
      return;
    }
    this.render(samples);
  }

  private render(samples: SampleSummary[]): void {
    this.lazy?.dispose();
    this.root.textContent = "";
    if (samples.length === 0) {
      const empty = this.root.ownerDocument.createElement("p");
      empty.className = "empty-state";
      empty.textContent = "no samples in the test split";
      this.root.append(empty);
      return;
    }
    this.lazy = this.observerFactory ? new LazyThumbnails(this.observerFactory) : new LazyThumbnails();
    const doc = this.root.ownerDocument;
    for (const sample of samples) {
      const card = doc.createElement("button");
      card.type = "button";
      card.className = "sample-card";
      card.dataset.sampleId = sample.sample_id;
      const img = doc.createElement("img");
      img.alt = sample.caption || sample.sample_id;
      img.width = 96;
      img.height = 96;
      this.lazy.register(img, pngSrc(sample.thumbnail));
      const label = doc.createElement("span");
      label.textContent = sample.sample_id;
      card.append(img, label);
      card.addEventListener("click", () => {
        this.markSelected(sample.sample_id);
        this.onSelect(sample);
      });
      this.root.append(card);
    }
  }

  private renderRetry(message: string): void {
    this.root.textContent = "";
    const doc = this.root.ownerDocument;
    const state = doc.createElement("div");
    state.className = "retry-state";
    const text = doc.createElement("p");
    text.textContent = `could not reach the service: ${message}`;
    const button = doc.createElement("button");
    button.type = "button";
    button.textContent = "retry";
    button.addEventListener("click", () => void this.load());
    state.append(text, button);
    this.root.append(state);
  }

  private markSelected(sampleId: string): void {
    this.selectedId = sampleId;
    for (const card of this.root.querySelectorAll<HTMLElement>(".sample-card")) {
      card.classList.toggle("selected", card.dataset.sampleId === sampleId);
    }
  }

  get selected(): string | null {
    return this.selectedId;
  }
}
