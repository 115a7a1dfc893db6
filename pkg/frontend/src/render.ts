// Pure HTML-string builders for the report view. No number on screen is
// computed here: probabilities and scores are stringified verbatim from the
// payload with String(), and the only derived quantity is a bar width in
// pixels (proportional within 1px rounding).

import type { ClassifyResponse, SuggestionReport } from "./types.js";

export const BAR_FULL_WIDTH_PX = 200;

export function confidenceBarWidth(probability: number): number {
  const clamped = Math.min(Math.max(probability, 0), 1);
  return Math.round(clamped * BAR_FULL_WIDTH_PX);
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function sidAnchor(sid: string): string {
  return `s-${sid.replace(":", "-")}`;
}

function renderHeadingPanel(report: SuggestionReport, index: number): string {
  const hc = report.heading_candidates[index];
  const rows = hc.full_manual_sentences
    .map((s) => {
      const cls = s.highlighted ? ' class="evidence"' : "";
      return `<li${cls} id="${sidAnchor(s.sid)}" data-sid="${escapeHtml(s.sid)}">${escapeHtml(s.text)}</li>`;
    })
    .join("");
  return [
    `<section class="heading-panel" data-heading="${escapeHtml(hc.heading)}">`,
    `<h3>Heading ${escapeHtml(hc.heading)} &mdash; ${escapeHtml(hc.title)}</h3>`,
    `<p class="confidence">confidence <span class="value">${String(hc.probability)}</span></p>`,
    `<ol class="manual">${rows}</ol>`,
    `</section>`,
  ].join("");
}

function renderSubheadingRow(report: SuggestionReport, index: number): string {
  const sc = report.subheading_candidates[index];
  const width = confidenceBarWidth(sc.calibrated_prob);
  return [
    `<tr data-subheading="${escapeHtml(sc.subheading)}">`,
    `<td>${escapeHtml(sc.subheading)}</td>`,
    `<td>${escapeHtml(sc.one_liner)}</td>`,
    `<td><span class="bar" style="width:${width}px"></span>` +
      `<span class="value">${String(sc.calibrated_prob)}</span></td>`,
    `</tr>`,
  ].join("");
}

/** The three-part report: description echo, heading panels, subheading list. */
export function renderReport(response: ClassifyResponse): string {
  const report = response.report;
  const parts: string[] = [];
  if (report.low_confidence) {
    parts.push(
      `<div class="banner warn" role="alert">Low confidence: the model recognized none of ` +
        `the description's words. Treat these candidates with caution.</div>`,
    );
  }
  for (const warning of report.warnings) {
    parts.push(`<div class="banner">${escapeHtml(warning)}</div>`);
  }
  parts.push(
    `<section class="description-echo"><h2>Item description</h2>` +
      `<p>${escapeHtml(report.description)}</p></section>`,
  );
  parts.push(`<section class="headings"><h2>Candidate headings</h2>`);
  for (let i = 0; i < report.heading_candidates.length; i++) {
    parts.push(renderHeadingPanel(report, i));
  }
  parts.push(`</section>`);
  parts.push(
    `<section class="subheadings"><h2>Candidate subheadings</h2>` +
      `<table><thead><tr><th>Code</th><th>Description</th><th>Confidence</th></tr></thead><tbody>`,
  );
  for (let i = 0; i < report.subheading_candidates.length; i++) {
    parts.push(renderSubheadingRow(report, i));
  }
  parts.push(`</tbody></table></section>`);
  parts.push(
    `<p class="meta">model ${escapeHtml(report.model_version)} &middot; ` +
      `generated ${escapeHtml(report.generated_at)} &middot; ` +
      `latency <span class="value">${String(response.latency_ms)}</span> ms</p>`,
  );
  return parts.join("");
}

export function renderError(code: string, message: string, canRetry: boolean): string {
  const retry = canRetry
    ? `<button type="button" id="retry" class="retry">Retry</button>`
    : "";
  return (
    `<div class="banner error" role="alert"><strong>${escapeHtml(code)}</strong> ` +
    `${escapeHtml(message)} ${retry}</div>`
  );
}

export function renderRawFallback(payload: unknown): string {
  return (
    `<div class="banner warn">Unexpected response shape; showing raw payload.</div>` +
    `<pre class="raw">${escapeHtml(JSON.stringify(payload, null, 2))}</pre>`
  );
}

/** Standalone HTML document for the export button. */
export function exportDocument(response: ClassifyResponse): string {
  const style = [
    "body{font-family:sans-serif;max-width:60em;margin:1em auto;padding:0 1em}",
    "li.evidence{color:#b00020;font-weight:bold}",
    ".banner{background:#fff3cd;border:1px solid #d4b106;padding:.5em 1em;margin:1em 0}",
    ".bar{display:inline-block;height:.8em;background:#4a78c2;vertical-align:middle;margin-right:.5em}",
    "table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:.3em .6em;text-align:left}",
  ].join("");
  return (
    `<!DOCTYPE html><html lang="en"><head><meta charset="utf-8">` +
    `<title>Classification suggestion</title><style>${style}</style></head>` +
    `<body><h1>Classification suggestion</h1>${renderReport(response)}</body></html>`
  );
}
