import { describe, expect, it } from "vitest";

import { ApiError, ExplorerApi } from "../src/api.js";
import { createMockService } from "./mockService.js";

describe("ExplorerApi", () => {
  it("lists samples and fetches one detail", async () => {
    const mock = createMockService();
    const api = new ExplorerApi("", mock.fetch);
    const samples = await api.listSamples();
    expect(samples).toHaveLength(3);
    const detail = await api.sampleDetail(samples[0]!.sample_id);
    expect(detail.sample_id).toBe(samples[0]!.sample_id);
    expect(detail.image.length).toBeGreaterThan(0);
  });

  it("posts generate requests as JSON and parses image plus meta", async () => {
    const mock = createMockService();
    const api = new ExplorerApi("", mock.fetch);
    const result = await api.generate({
      sample_id: "sample_00000",
      prompt: "a person",
      strength: 0.6,
      steps: 100,
      guidance: 1.0,
      seed: 3,
    });
    expect(result.meta.seed).toBe(3);
    expect(result.meta.t_start).toBe(600);
    expect(result.image.length).toBeGreaterThan(0);
    const post = mock.requests.find((r) => r.method === "POST");
    expect(post?.body).toMatchObject({ sample_id: "sample_00000", strength: 0.6, steps: 100 });
  });

  it("turns a 400 into an ApiError naming the field", async () => {
    const mock = createMockService();
    const api = new ExplorerApi("", mock.fetch);
    const bad = api.generate({ sample_id: "sample_00000", prompt: "", strength: 1.5, steps: 100, guidance: 1 });
    const err = (await bad.catch((e: unknown) => e)) as ApiError;
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.field).toBe("strength");
  });

  it("reports unknown samples as 404 without a field", async () => {
    const mock = createMockService();
    const api = new ExplorerApi("", mock.fetch);
    const err = (await api.sampleDetail("nope").catch((e: unknown) => e)) as ApiError;
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
    expect(err.field).toBeUndefined();
  });
});
