"""Assembly and rendering of the officer-facing suggestion document.

Three parts: the entered description, candidate headings with the full
manual text and the evidential sentences highlighted, and candidate
subheadings with calibrated confidence. JSON is the canonical form (sorted
keys, compact separators); HTML is a self-contained, script-free rendering.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import html as html_mod
import json
from dataclasses import dataclass, field

from .corpus import CodeLevel, KnowledgeBase, Manual
from .encoder import ModelArtifact, predict_topk
from .errors import ValidationError
from .retrieval import (
    EMPTY_NEIGHBORHOOD,
    RetrievalConfig,
    ScoredSentence,
    kb_topk_cases,
    score_heading_sentences,
)
from .text import IdfTable


@dataclass(frozen=True)
class ManualSentenceView:
    sid: str
    text: str
    highlighted: bool
    total_score: float


@dataclass(frozen=True)
class HeadingCandidate:
    heading: str
    probability: float  # calibrated mass of the heading's subheadings
    title: str
    full_manual_sentences: tuple[ManualSentenceView, ...]
    evidence: tuple[ScoredSentence, ...]


@dataclass(frozen=True)
class SubheadingCandidate:
    subheading: str
    one_liner: str
    raw_prob: float
    calibrated_prob: float


@dataclass(frozen=True)
class SuggestionReport:
    description: str
    generated_at: str  # ISO 8601
    model_version: str
    heading_candidates: tuple[HeadingCandidate, ...]
    subheading_candidates: tuple[SubheadingCandidate, ...]
    low_confidence: bool
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "generated_at": self.generated_at,
            "model_version": self.model_version,
            "low_confidence": self.low_confidence,
            "warnings": list(self.warnings),
            "heading_candidates": [
                {
                    "heading": hc.heading,
                    "probability": hc.probability,
                    "title": hc.title,
                    "full_manual_sentences": [
                        {
                            "sid": s.sid,
                            "text": s.text,
                            "highlighted": s.highlighted,
                            "total_score": s.total_score,
                        }
                        for s in hc.full_manual_sentences
                    ],
                    "evidence": [
                        {
                            "sid": e.sid,
                            "text_score": e.text_score,
                            "expert_score": e.expert_score,
                            "total_score": e.total_score,
                        }
                        for e in hc.evidence
                    ],
                }
                for hc in self.heading_candidates
            ],
            "subheading_candidates": [
                {
                    "subheading": sc.subheading,
                    "one_liner": sc.one_liner,
                    "raw_prob": sc.raw_prob,
                    "calibrated_prob": sc.calibrated_prob,
                }
                for sc in self.subheading_candidates
            ],
        }


def build_report(
    model: ModelArtifact,
    manual: Manual,
    kb: KnowledgeBase,
    idf: IdfTable,
    description: str,
    k: int = 3,
    n_sentences: int = 7,
    config: RetrievalConfig | None = None,
    generated_at: dt.datetime | None = None,
) -> SuggestionReport:
    """Predict top-k headings and subheadings and attach scored evidence.

    Deterministic given its inputs; ``generated_at`` defaults to the current
    UTC time, so pass a fixed timestamp to reproduce byte-identical reports.
    A predicted heading with no manual entry is skipped with a warning and
    the next candidate is pulled in.
    """
    if config is None:
        config = RetrievalConfig(n_sentences=n_sentences)
    elif config.n_sentences != n_sentences:
        config = dataclasses.replace(config, n_sentences=n_sentences)
    if generated_at is None:
        generated_at = dt.datetime.now(dt.timezone.utc)

    heading_pred = predict_topk(model, description, k=len(model.labels), level=CodeLevel.HEADING)
    if len(kb) == 0:
        neighborhood = EMPTY_NEIGHBORHOOD
    else:
        neighborhood = kb_topk_cases(description, kb, model, config.k_case)

    warnings: list[str] = []
    heading_blocks: list[HeadingCandidate] = []
    for ranked in heading_pred.ranked:
        if len(heading_blocks) == k:
            break
        hm = manual.get(ranked.code)
        if hm is None:
            warnings.append(f"heading {ranked.code} has no manual entry; skipped")
            continue
        scored = score_heading_sentences(
            description, ranked.code, manual, kb, model, idf, config, neighborhood
        )
        evidence = tuple(scored[: config.n_sentences])
        highlighted = {e.sid for e in evidence}
        by_sid = {s.sid: s for s in scored}
        views = tuple(
            ManualSentenceView(
                sid=s.sid,
                text=s.text,
                highlighted=s.sid in highlighted,
                total_score=by_sid[s.sid].total_score,
            )
            for s in hm.sentences
        )
        heading_blocks.append(
            HeadingCandidate(
                heading=ranked.code,
                probability=ranked.calibrated_prob,
                title=hm.title,
                full_manual_sentences=views,
                evidence=evidence,
            )
        )
    if len(heading_blocks) < k and len(heading_blocks) < len(heading_pred.ranked):
        warnings.append(
            f"only {len(heading_blocks)} of {k} requested heading candidates have manual entries"
        )

    sub_pred = predict_topk(model, description, k=k, level=CodeLevel.SUBHEADING)
    sub_candidates = []
    for ranked in sub_pred.ranked:
        hm = manual.get(ranked.code[:4])
        one_liner = hm.subheading_oneliners.get(ranked.code, "") if hm else ""
        sub_candidates.append(
            SubheadingCandidate(
                subheading=ranked.code,
                one_liner=one_liner,
                raw_prob=ranked.raw_prob,
                calibrated_prob=ranked.calibrated_prob,
            )
        )

    return SuggestionReport(
        description=description,
        generated_at=generated_at.isoformat(),
        model_version=model.version,
        heading_candidates=tuple(heading_blocks),
        subheading_candidates=tuple(sub_candidates),
        low_confidence=sub_pred.low_confidence,
        warnings=tuple(warnings),
    )


def canonical_json(obj: dict) -> bytes:
    """The canonical report serialization: sorted keys, compact separators,
    UTF-8. Parsing and re-rendering is byte-stable."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":")).encode("utf-8")


def render(report: SuggestionReport, format: str = "json") -> bytes:
    if format == "json":
        return canonical_json(report.to_dict())
    if format == "html":
        return _render_html(report).encode("utf-8")
    raise ValidationError(f"unknown report format {format!r}")


_STYLE = (
    "body{font-family:sans-serif;max-width:60em;margin:1em auto;padding:0 1em}"
    "li.evidence{color:#b00020;font-weight:bold}"
    ".banner{background:#fff3cd;border:1px solid #d4b106;padding:.5em 1em;margin:1em 0}"
    ".confidence{color:#555;font-size:.9em}"
    "table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:.3em .6em;text-align:left}"
)


def _render_html(report: SuggestionReport) -> str:
    esc = html_mod.escape
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en"><head><meta charset="utf-8">',
        "<title>Classification suggestion</title>",
        f"<style>{_STYLE}</style>",
        "</head><body>",
        "<h1>Classification suggestion</h1>",
    ]
    if report.low_confidence:
        parts.append(
            '<div class="banner" role="alert">Low confidence: no description token was '
            "recognized by the model; treat the candidates below with caution.</div>"
        )
    for warning in report.warnings:
        parts.append(f'<div class="banner">{esc(warning)}</div>')

    parts.append("<section><h2>Item description</h2>")
    parts.append(f"<p>{esc(report.description)}</p></section>")

    parts.append("<section><h2>Candidate headings</h2>")
    for hc in report.heading_candidates:
        parts.append(
            f"<h3>Heading {esc(hc.heading)} — {esc(hc.title)} "
            f'<span class="confidence">(confidence {hc.probability})</span></h3>'
        )
        parts.append("<ol>")
        for s in hc.full_manual_sentences:
            cls = ' class="evidence"' if s.highlighted else ""
            parts.append(f'<li{cls} data-sid="{esc(s.sid)}">{esc(s.text)}</li>')
        parts.append("</ol>")
    parts.append("</section>")

    parts.append("<section><h2>Candidate subheadings</h2><table>")
    parts.append("<tr><th>Subheading</th><th>Description</th><th>Confidence</th></tr>")
    for sc in report.subheading_candidates:
        parts.append(
            f"<tr><td>{esc(sc.subheading)}</td><td>{esc(sc.one_liner)}</td>"
            f"<td>{sc.calibrated_prob}</td></tr>"
        )
    parts.append("</table></section>")
    parts.append(
        f'<p class="confidence">Model version {esc(report.model_version)}, '
        f"generated {esc(report.generated_at)}</p>"
    )
    parts.append("</body></html>")
    return "".join(parts)
