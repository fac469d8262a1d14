import { ApiError, type ExplorerApi } from "./api.js";
import { CompareView } from "./compare.js";
import { GenerateForm, type FormValues } from "./form.js";
import { SessionHistory } from "./history.js";
import { SampleGrid } from "./grid.js";
import { SerialQueue } from "./queue.js";
import { pngSrc, type GenerateRequest, type SampleDetail, type SessionEntry } from "./types.js";

export interface AppOptions {
  observerFactory?: import("./lazy.js").ObserverFactory;
}

/**
 * Wires grid, form, history and compare view together. All render methods
 * are pure functions of the session history plus the compare selection, so
 * the visible state can always be rebuilt from the entries alone.
 */
export class ExplorerApp {
  readonly grid: SampleGrid;
  readonly form: GenerateForm;
  readonly history = new SessionHistory();
  readonly compare: CompareView;
  private readonly queue = new SerialQueue();
  private readonly api: ExplorerApi;
  private readonly root: HTMLElement;
  private reference: SampleDetail | null = null;
  private readonly compareSelection = new Set<number>();

  constructor(root: HTMLElement, api: ExplorerApi, options: AppOptions = {}) {
    this.root = root;
    this.api = api;
    const doc = root.ownerDocument;

    this.grid = new SampleGrid(api, (sample) => void this.select(sample.sample_id), {
      observerFactory: options.observerFactory,
      doc,
    });
    this.form = new GenerateForm((values) => void this.generate(values), doc);
    this.compare = new CompareView(doc);

    const banner = doc.createElement("p");
    banner.className = "app-error";
    banner.hidden = true;

    const reference = doc.createElement("section");
    reference.className = "reference-panel";
    reference.innerHTML = `<p class="hint">pick a sample to load its reference image</p>`;

    const historyList = doc.createElement("section");
    historyList.className = "history-list";

    root.append(banner, this.grid.root, reference, this.form.root, historyList, this.compare.root);
  }

  async start(): Promise<void> {
    await this.grid.load();
  }

  get selectedSample(): string | null {
    return this.grid.selected;
  }

  async select(sampleId: string): Promise<void> {
    try {
      this.reference = await this.api.sampleDetail(sampleId);
    } catch (err) {
      this.showError(err);
      return;
    }
    const panel = this.panel(".reference-panel");
    panel.textContent = "";
    const doc = this.root.ownerDocument;
    const img = doc.createElement("img");
    img.className = "reference-image";
    img.src = pngSrc(this.reference.image);
    const caption = doc.createElement("p");
    caption.textContent = `${this.reference.sample_id}: ${this.reference.caption}`;
    panel.append(img, caption);
    this.renderCompare();
  }

  /** Queue one generation; the service sees at most one request at a time. */
  async generate(values: FormValues): Promise<void> {
    const sampleId = this.grid.selected;
    if (sampleId === null) {
      this.form.setStatus("pick a sample first");
      return;
    }
    const { seed, ...rest } = values;
    const request: GenerateRequest = seed === undefined ? { sample_id: sampleId, ...rest } : { sample_id: sampleId, ...rest, seed };
    this.updateQueueStatus();
    try {
      const t0 = performance.now();
      const result = await this.queue.run(() => this.api.generate(request));
      this.history.add(request, result.image, result.meta, performance.now() - t0);
      this.hideError();
      this.renderHistory();
    } catch (err) {
      if (err instanceof ApiError && err.field !== undefined) {
        this.form.setFieldError(err.field, err.body.error);
      } else {
        this.showError(err);
      }
    } finally {
      this.updateQueueStatus();
    }
  }

  toggleCompare(entryId: number, selected: boolean): void {
    if (selected) this.compareSelection.add(entryId);
    else this.compareSelection.delete(entryId);
    this.renderHistory();
  }

  /** Full rebuild from history state; no incremental DOM bookkeeping. */
  renderHistory(): void {
    const list = this.panel(".history-list");
    list.textContent = "";
    const doc = this.root.ownerDocument;
    for (const entry of this.history.entries) {
      list.append(this.historyCard(doc, entry));
    }
    this.renderCompare();
  }

  private historyCard(doc: Document, entry: SessionEntry): HTMLElement {
    const card = doc.createElement("article");
    card.className = "history-entry";
    card.dataset.entryId = String(entry.id);

    const img = doc.createElement("img");
    img.src = pngSrc(entry.image);
    img.alt = entry.request.prompt || `entry ${entry.id}`;

    const line = doc.createElement("p");
    line.className = "entry-params";
    const seedText = entry.meta.seed;
    line.textContent =
      `#${entry.id} "${entry.request.prompt}" strength ${entry.request.strength} ` +
      `steps ${entry.request.steps} seed ${seedText} (${entry.latencyMs.toFixed(0)} ms)`;

    card.append(img, line);

    if (entry.request.strength === 0) {
      const badge = doc.createElement("span");
      badge.className = "badge direct-decode";
      badge.textContent = "direct decode";
      card.append(badge);
    }

    const duplicate = this.history.duplicateOf(entry);
    if (duplicate !== undefined) {
      const hint = doc.createElement("span");
      hint.className = "dedup-hint";
      hint.textContent = `identical to #${duplicate.id}`;
      card.append(hint);
    }

    const compare = doc.createElement("label");
    compare.className = "compare-toggle";
    const box = doc.createElement("input");
    box.type = "checkbox";
    box.checked = this.compareSelection.has(entry.id);
    box.addEventListener("change", () => this.toggleCompare(entry.id, box.checked));
    compare.append(box, doc.createTextNode(" compare"));
    card.append(compare);

    return card;
  }

  private renderCompare(): void {
    const selected = this.history.entries.filter((e) => this.compareSelection.has(e.id));
    const ref = this.reference === null ? null : { image: this.reference.image, label: this.reference.sample_id };
    this.compare.render(ref, selected);
  }

  private updateQueueStatus(): void {
    if (!this.queue.busy) {
      this.form.setStatus("");
    } else if (this.queue.queued > 0) {
      this.form.setStatus(`generating… (${this.queue.queued} queued)`);
    } else {
      this.form.setStatus("generating…");
    }
  }

  private showError(err: unknown): void {
    const banner = this.panel(".app-error");
    banner.hidden = false;
    banner.textContent = err instanceof Error ? err.message : String(err);
  }

  private hideError(): void {
    const banner = this.panel(".app-error");
    banner.hidden = true;
    banner.textContent = "";
  }

  private panel(selector: string): HTMLElement {
    const el = this.root.querySelector<HTMLElement>(selector);
    if (!el) throw new Error(`missing panel ${selector}`);
    return el;
  }
}
