// Payload shapes of the classification service. The console never computes
// scores of its own: every number shown on screen comes from these objects.

export interface ManualSentenceView {
  sid: string;
  text: string;
  highlighted: boolean;
  total_score: number;
}

export interface EvidenceItem {
  sid: string;
  text_score: number;
  expert_score: number;
  total_score: number;
}

export interface HeadingCandidate {
  heading: string;
  probability: number;
  title: string;
  full_manual_sentences: ManualSentenceView[];
  evidence: EvidenceItem[];
}

export interface SubheadingCandidate {
  subheading: string;
  one_liner: string;
  raw_prob: number;
  calibrated_prob: number;
}

export interface SuggestionReport {
  description: string;
  generated_at: string;
  model_version: string;
  low_confidence: boolean;
  warnings: string[];
  heading_candidates: HeadingCandidate[];
  subheading_candidates: SubheadingCandidate[];
}

export interface ClassifyRequest {
  description: string;
  k: number;
  n_sentences: number;
  lambda?: number;
}

export interface ClassifyResponse {
  report: SuggestionReport;
  request: ClassifyRequest;
  latency_ms: number;
}

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

/** Structural check before rendering; a mismatch falls back to a raw JSON view. */
export function isClassifyResponse(x: unknown): x is ClassifyResponse {
  if (!isRecord(x) || !isRecord(x.report)) return false;
  const report = x.report;
  if (typeof report.description !== "string") return false;
  if (!Array.isArray(report.heading_candidates)) return false;
  if (!Array.isArray(report.subheading_candidates)) return false;
  for (const hc of report.heading_candidates) {
    if (!isRecord(hc)) return false;
    if (typeof hc.heading !== "string" || typeof hc.probability !== "number") return false;
    if (!Array.isArray(hc.full_manual_sentences) || !Array.isArray(hc.evidence)) return false;
  }
  for (const sc of report.subheading_candidates) {
    if (!isRecord(sc)) return false;
    if (typeof sc.subheading !== "string" || typeof sc.calibrated_prob !== "number") return false;
  }
  return typeof report.low_confidence === "boolean";
}
