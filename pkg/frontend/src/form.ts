import type { GenerateRequest } from "./types.js";

export type FormErrors = Partial<Record<string, string>>;

export interface FormValues {
  prompt: string;
  strength: number;
  steps: number;
  guidance: number;
  seed?: number;
}

/** Bounds shared with the service; violations never leave the client. */
export function validateValues(v: FormValues): FormErrors {
  const errors: FormErrors = {};
  if (!Number.isFinite(v.strength) || v.strength < 0 || v.strength > 1) {
    errors.strength = "strength must lie in [0, 1]";
  }
  if (!Number.isInteger(v.steps) || v.steps < 1 || v.steps > 1000) {
    errors.steps = "steps must be an integer in [1, 1000]";
  }
  if (!Number.isFinite(v.guidance) || v.guidance < 0 || v.guidance > 30) {
    errors.guidance = "guidance must lie in [0, 30]";
  }
  if (v.seed !== undefined && !Number.isInteger(v.seed)) {
    errors.seed = "seed must be an integer";
  }
  return errors;
}

/**
 * Prompt/strength/steps/guidance/seed controls. Submission runs validation
 * first; invalid values keep onSubmit from ever firing and are flagged on
 * the field. Service-side 400s land on the same per-field slots.
 */
export class GenerateForm {
  readonly root: HTMLFormElement;
  private readonly onSubmit: (values: FormValues) => void;

  constructor(onSubmit: (values: FormValues) => void, doc: Document = document) {
    this.onSubmit = onSubmit;
    this.root = doc.createElement("form");
    this.root.className = "generate-form";
    this.root.noValidate = true;
    this.root.innerHTML = `
      <label>prompt
        <input name="prompt" type="text" value="" placeholder="leave empty for unconditioned">
        <span class="field-error" data-field="prompt"></span>
      </label>
      <label>strength <output name="strength-value">0.6</output>
        <input name="strength" type="range" min="0" max="1" step="0.01" value="0.6">
        <span class="field-error" data-field="strength"></span>
      </label>
      <label>steps
        <input name="steps" type="number" min="1" max="1000" step="1" value="100">
        <span class="field-error" data-field="steps"></span>
      </label>
      <label>guidance
        <input name="guidance" type="number" min="0" max="30" step="0.1" value="1">
        <span class="field-error" data-field="guidance"></span>
      </label>
      <label>seed
        <input name="seed" type="number" step="1" placeholder="random">
        <span class="field-error" data-field="seed"></span>
      </label>
      <button type="submit">generate</button>
      <span class="queue-status"></span>
      <span class="field-error" data-field="csi"></span>
    `;
    this.root.addEventListener("submit", (event) => {
      event.preventDefault();
      this.submit();
    });
    const strength = this.input("strength");
    strength.addEventListener("input", () => {
      const out = this.root.querySelector<HTMLOutputElement>("output[name=strength-value]");
      if (out) out.value = strength.value;
    });
  }

  values(): FormValues {
    const seedRaw = this.input("seed").value.trim();
    return {
      prompt: this.input("prompt").value,
      strength: Number(this.input("strength").value),
      steps: Number(this.input("steps").value),
      guidance: Number(this.input("guidance").value),
      seed: seedRaw === "" ? undefined : Number(seedRaw),
    };
  }

  /** Validate current values; render errors and return whether submission happened. */
  submit(): boolean {
    this.clearErrors();
    const values = this.values();
    const errors = validateValues(values);
    if (Object.keys(errors).length > 0) {
      for (const [field, message] of Object.entries(errors)) {
        if (message) this.setFieldError(field, message);
      }
      return false;
    }
    this.onSubmit(values);
    return true;
  }

  request(sampleId: string): GenerateRequest {
    const { seed, ...rest } = this.values();
    return seed === undefined ? { sample_id: sampleId, ...rest } : { sample_id: sampleId, ...rest, seed };
  }

  setFieldError(field: string, message: string): void {
    const slot = this.root.querySelector<HTMLElement>(`.field-error[data-field="${field}"]`);
    if (slot) {
      slot.textContent = message;
    } else {
      this.setStatus(`${field}: ${message}`);
    }
  }

  clearErrors(): void {
    for (const slot of this.root.querySelectorAll(".field-error")) {
      slot.textContent = "";
    }
  }

  setStatus(text: string): void {
    const slot = this.root.querySelector<HTMLElement>(".queue-status");
    if (slot) slot.textContent = text;
  }

  private input(name: string): HTMLInputElement {
    const el = this.root.querySelector<HTMLInputElement>(`input[name="${name}"]`);
    if (!el) throw new Error(`form is missing input ${name}`);
    return el;
  }
}
