/** The slice of IntersectionObserver the grid needs, injectable for tests. */
export interface VisibilityObserver {
  observe(el: Element): void;
  unobserve(el: Element): void;
  disconnect(): void;
}

export type VisibilityCallback = (el: Element) => void;
export type ObserverFactory = (onVisible: VisibilityCallback) => VisibilityObserver;

/** Fires immediately on observe; used where IntersectionObserver is missing. */
class EagerObserver implements VisibilityObserver {
  constructor(private readonly onVisible: VisibilityCallback) {}
  observe(el: Element): void {
    this.onVisible(el);
  }
  unobserve(): void {}
  disconnect(): void {}
}

export function defaultObserverFactory(onVisible: VisibilityCallback): VisibilityObserver {
  if (typeof IntersectionObserver === "undefined") {
    return new EagerObserver(onVisible);
  }
  const io = new IntersectionObserver((records) => {
    for (const record of records) {
      if (record.isIntersecting) onVisible(record.target);
    }
  });
  return io;
}

/**
 * Defers setting <img> sources until the element is visible, so thumbnails
 * load in viewport order instead of all at once.
 */
export class LazyThumbnails {
  private readonly observer: VisibilityObserver;
  private readonly sources = new Map<Element, string>();

  constructor(factory: ObserverFactory = defaultObserverFactory) {
    this.observer = factory((el) => this.reveal(el));
  }

  register(img: HTMLImageElement, src: string): void {
    this.sources.set(img, src);
    this.observer.observe(img);
  }

  private reveal(el: Element): void {
    const src = this.sources.get(el);
    if (src === undefined) return;
    (el as HTMLImageElement).src = src;
    this.sources.delete(el);
    this.observer.unobserve(el);
  }

  dispose(): void {
    this.sources.clear();
    this.observer.disconnect();
  }
}
