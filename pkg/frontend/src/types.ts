/** Wire types, mirroring the service JSON field for field. */

export interface SampleSummary {
  sample_id: string;
  split: string;
  caption: string;
  box: number[] | null;
  /** base64 PNG, at most 128 px on the long side */
  thumbnail: string;
}

export interface SampleDetail {
  sample_id: string;
  split: string;
  caption: string;
  box: number[] | null;
  /** base64 PNG at full resolution */
  image: string;
}

export interface GenerateRequest {
  sample_id?: string;
  csi?: number[];
  prompt: string;
  strength: number;
  steps: number;
  guidance: number;
  seed?: number;
}

export interface GenerateMeta {
  sample_id: string | null;
  prompt: string;
  strength: number;
  steps: number;
  seed: number;
  guidance: number;
  t_start: number | null;
  latent_mse: number | null;
  predict_ms: number;
  diffusion_ms: number;
  elapsed_ms: number;
}

export interface GenerateResult {
  /** base64 PNG, displayed exactly as received */
  image: string;
  meta: GenerateMeta;
}

/** One completed generation; frozen on creation, ordered by id. */
export interface SessionEntry {
  readonly id: number;
  readonly request: Readonly<GenerateRequest>;
  readonly image: string;
  readonly meta: Readonly<GenerateMeta>;
  readonly timestamp: number;
  readonly latencyMs: number;
}

export function pngSrc(base64: string): string {
  return `data:image/png;base64,${base64}`;
}
