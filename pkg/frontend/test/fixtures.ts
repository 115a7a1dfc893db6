import type { ClassifyResponse } from "../src/types.js";

export function sampleResponse(overrides: Partial<ClassifyResponse["report"]> = {}): ClassifyResponse {
  return {
    report: {
      description: "centrifugal pump with электро motor <spec>",
      generated_at: "2024-01-01T00:00:00+00:00",
      model_version: "0.1.0",
      low_confidence: false,
      warnings: [],
      heading_candidates: [
        {
          heading: "8413",
          probability: 0.8172439,
          title: "pumps for liquids",
          full_manual_sentences: [
            { sid: "8413:0", text: "pumps for liquids in general", highlighted: true, total_score: 4.21 },
            { sid: "8413:1", text: "hand pumps excluded here", highlighted: false, total_score: 0.4 },
            { sid: "8413:2", text: "centrifugal pumps of all kinds", highlighted: true, total_score: 5.5 },
          ],
          evidence: [
            { sid: "8413:2", text_score: 5.2, expert_score: 1.0, total_score: 5.5 },
            { sid: "8413:0", text_score: 4.0, expert_score: 0.7, total_score: 4.21 },
          ],
        },
        {
          heading: "8414",
          probability: 0.12,
          title: "air pumps and compressors",
          full_manual_sentences: [
            { sid: "8414:0", text: "air or vacuum pumps", highlighted: true, total_score: 2.0 },
          ],
          evidence: [{ sid: "8414:0", text_score: 2.0, expert_score: 0.0, total_score: 2.0 }],
        },
      ],
      subheading_candidates: [
        { subheading: "841370", one_liner: "other centrifugal pumps", raw_prob: 0.91, calibrated_prob: 0.8172439 },
        { subheading: "841381", one_liner: "other pumps", raw_prob: 0.05, calibrated_prob: 0.12 },
        { subheading: "841480", one_liner: "other compressors", raw_prob: 0.04, calibrated_prob: 0.0627561 },
      ],
      ...overrides,
    },
    request: { description: "centrifugal pump", k: 3, n_sentences: 7 },
    latency_ms: 12.5,
  };
}
