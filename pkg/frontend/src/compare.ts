import { pngSrc, type SessionEntry } from "./types.js";

export interface PanelSize {
  width: number;
  height: number;
}

export interface CompositeLayout {
  width: number;
  height: number;
  /** x offset of each panel's left edge, in input order */
  offsets: number[];
}

/** Panels sit side by side: total width is the sum, height the max. */
export function compositeLayout(panels: PanelSize[]): CompositeLayout {
  let x = 0;
  const offsets: number[] = [];
  let height = 0;
  for (const panel of panels) {
    offsets.push(x);
    x += panel.width;
    height = Math.max(height, panel.height);
  }
  return { width: x, height, offsets };
}

/**
 * Reference image next to selected generations, captioned by prompt.
 * Hidden while nothing is selected. Export stitches the loaded images into
 * one canvas laid out by compositeLayout.
 */
export class CompareView {
  readonly root: HTMLElement;

  constructor(doc: Document = document) {
    this.root = doc.createElement("section");
    this.root.className = "compare-view";
    this.root.hidden = true;
  }

  render(reference: { image: string; label: string } | null, entries: readonly SessionEntry[]): void {
    this.root.textContent = "";
    if (reference === null || entries.length === 0) {
      this.root.hidden = true;
      return;
    }
    this.root.hidden = false;
    const doc = this.root.ownerDocument;
    const row = doc.createElement("div");
    row.className = "compare-row";
    row.append(this.panel(doc, pngSrc(reference.image), reference.label, "reference"));
    for (const entry of entries) {
      const caption = entry.request.prompt || "(no prompt)";
      row.append(this.panel(doc, pngSrc(entry.image), caption, `entry-${entry.id}`));
    }
    const exportBtn = doc.createElement("button");
    exportBtn.type = "button";
    exportBtn.className = "export-composite";
    exportBtn.textContent = "export composite";
    exportBtn.addEventListener("click", () => this.exportComposite());
    this.root.append(row, exportBtn);
  }

  private panel(doc: Document, src: string, caption: string, key: string): HTMLElement {
    const panel = doc.createElement("figure");
    panel.className = "compare-panel";
    panel.dataset.key = key;
    const img = doc.createElement("img");
    img.src = src;
    const cap = doc.createElement("figcaption");
    cap.textContent = caption;
    panel.append(img, cap);
    return panel;
  }

  /** Draw every panel image onto one canvas and hand it to the browser as a download. */
  exportComposite(): HTMLCanvasElement | null {
    const images = [...this.root.querySelectorAll<HTMLImageElement>(".compare-panel img")];
    if (images.length === 0) return null;
    const sizes = images.map((img) => ({
      width: img.naturalWidth || img.width || 64,
      height: img.naturalHeight || img.height || 64,
    }));
    const layout = compositeLayout(sizes);
    const canvas = this.root.ownerDocument.createElement("canvas");
    canvas.width = layout.width;
    canvas.height = layout.height;
    const ctx = canvas.getContext("2d");
    if (ctx === null) return null;
    images.forEach((img, i) => {
      const offset = layout.offsets[i];
      if (offset !== undefined) ctx.drawImage(img, offset, 0);
    });
    const link = this.root.ownerDocument.createElement("a");
    link.download = "comparison.png";
    link.href = canvas.toDataURL("image/png");
    link.click();
    return canvas;
  }
}
