import type { GenerateMeta, GenerateRequest, SessionEntry } from "./types.js";

function sameRequest(a: Readonly<GenerateRequest>, b: Readonly<GenerateRequest>): boolean {
  return (
    a.sample_id === b.sample_id &&
    a.prompt === b.prompt &&
    a.strength === b.strength &&
    a.steps === b.steps &&
    a.guidance === b.guidance &&
    a.seed === b.seed
  );
}

/** Append-only record of completed generations; entries are frozen. */
export class SessionHistory {
  private readonly items: SessionEntry[] = [];
  private nextId = 1;

  add(
    request: GenerateRequest,
    image: string,
    meta: GenerateMeta,
    latencyMs: number,
    timestamp: number = Date.now(),
  ): SessionEntry {
    const entry: SessionEntry = Object.freeze({
      id: this.nextId++,
      request: Object.freeze({ ...request }),
      image,
      meta: Object.freeze({ ...meta }),
      timestamp,
      latencyMs,
    });
    this.items.push(entry);
    return entry;
  }

  get entries(): readonly SessionEntry[] {
    return this.items;
  }

  get(id: number): SessionEntry | undefined {
    return this.items.find((e) => e.id === id);
  }

  /**
   * Earliest prior entry with the same request and identical image bytes;
   * with a fixed seed the service is deterministic, so resubmission lands here.
   */
  duplicateOf(entry: SessionEntry): SessionEntry | undefined {
    return this.items.find(
      (e) => e.id !== entry.id && e.id < entry.id && sameRequest(e.request, entry.request) && e.image === entry.image,
    );
  }
}
